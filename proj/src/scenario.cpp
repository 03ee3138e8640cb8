#include "seasonal/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "seasonal/conditions.hpp"
#include "seasonal/simulator.hpp"

namespace seasonal {

using nlohmann::json;

namespace {

// ---- parsing ---------------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw ParseError("unknown key: " + (where.empty() ? "" : where + ".") + item.key());
  }
}

std::string key_path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double number_at(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(key_path(where, key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(key_path(where, key) + ": must be finite");
  return d;
}

double positive_at(const json& obj, const char* key, const std::string& where) {
  const double d = number_at(obj, key, where);
  if (!(d > 0)) throw ParseError(key_path(where, key) + ": must be positive");
  return d;
}

int integer_at(const json& obj, const char* key, const std::string& where, int minimum) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(key_path(where, key) + ": expected an integer");
  const auto i = v.get<long long>();
  if (i < minimum || i > std::numeric_limits<int>::max()) {
    throw ParseError(key_path(where, key) + ": must be at least " + std::to_string(minimum));
  }
  return static_cast<int>(i);
}

double fraction_value(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double d = v.get<double>();
  if (!(d >= 0.0 && d <= 1.0)) throw ParseError(where + ": must lie in [0, 1]");
  return d;
}

insect::InsectParams parse_params(const json& obj, const std::string& where) {
  check_keys(obj, {"b", "h", "dJ", "cJ", "dA"}, where);
  insect::InsectParams p;
  const std::pair<const char*, double*> fields[] = {
      {"b", &p.b}, {"h", &p.h}, {"dJ", &p.d_J}, {"cJ", &p.c_J}, {"dA", &p.d_A}};
  for (auto [key, slot] : fields) {
    if (!obj.contains(key)) throw ParseError(key_path(where, key) + ": missing");
    *slot = number_at(obj, key, where);
    if (*slot < 0) throw ParseError(key_path(where, key) + ": must be nonnegative");
  }
  return p;
}

MatrixXd parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ParseError(where + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (!v[0].is_array()) throw ParseError(where + ": expected a nonempty array of rows");
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(where + ": rows must have equal length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& x = row[static_cast<std::size_t>(j)];
      if (!x.is_number() || !std::isfinite(x.get<double>())) throw ParseError(where + ": entries must be numbers");
      m(i, j) = x.get<double>();
    }
  }
  if (rows != cols) throw ParseError(where + ": matrix must be square");
  return m;
}

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json params_json(const insect::InsectParams& p) {
  return {{"b", p.b}, {"h", p.h}, {"dJ", p.d_J}, {"cJ", p.c_J}, {"dA", p.d_A}};
}

json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// ---- output helpers --------------------------------------------------------

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << content;
  return path;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double require_theta(const Scenario& s) {
  if (!s.theta) throw UsageError("missing required key: theta");
  return *s.theta;
}

SimulationOptions simulation_options(const Scenario& s) {
  SimulationOptions o;
  o.step = s.tolerances.ode_step;
  o.extinction_threshold = s.tolerances.extinction_threshold;
  o.divergence_bound = s.tolerances.divergence_bound;
  return o;
}

json certificate_json(const ConditionCertificate& c) {
  json stages = json::array();
  for (const auto& st : c.stages) {
    stages.push_back({{"name", st.name}, {"holds", st.holds}, {"margin", st.margin}, {"note", st.note}});
  }
  return {{"condition", to_string(c.condition)},
          {"holds", c.holds},
          {"worst_margin", c.worst_margin()},
          {"evidence", c.evidence},
          {"theta_grid", c.theta_grid},
          {"stages", stages},
          {"note", c.note}};
}

std::string classify_rho(double rho) {
  if (rho > 1.0) return "persistent";
  if (rho < 1.0) return "extinct";
  return "critical";
}

// ---- commands --------------------------------------------------------------

CommandResult command_floquet(const Scenario& s, const CommandOptions& opts) {
  const auto sweep = run_sweep(s, opts.with_simulation);
  CommandResult r;
  r.files.push_back(write_file(opts.out_dir, "sweep.csv", sweep.csv));
  std::ostringstream text;
  text << "sweep: " << s.grid().size() << " rows, " << sweep.row_errors << " row errors\n";
  r.summary = text.str();
  r.exit_code = sweep.row_errors == 0 ? 0 : 1;
  return r;
}

CommandResult command_threshold(const Scenario& s, const CommandOptions& opts) {
  ThresholdOptions topts;
  topts.tol = s.tolerances.bisect_tol;
  topts.grid_points = std::max<std::size_t>(2, s.grid().size());
  topts.floquet = s.floquet_options();
  CommandResult r;
  json j;
  std::ostringstream text;
  try {
    const auto rep = find_threshold(s.linearization(), topts);
    j = {{"theta_star", rep.theta_star},
         {"regime", to_string(rep.regime)},
         {"monotone_certificate", rep.monotone_certificate},
         {"bracket_lo", rep.bracket_lo},
         {"bracket_hi", rep.bracket_hi},
         {"rho_at_threshold", rep.rho_at_threshold},
         {"rho_at_zero", rep.rho_at_zero},
         {"rho_at_one", rep.rho_at_one},
         {"iterations", rep.iterations},
         {"certificate_detail", rep.certificate_detail}};
    text << "regime " << to_string(rep.regime) << ", theta* = " << format_number(rep.theta_star) << "\n";
  } catch (const CertificateError& e) {
    j = {{"regime", "uncertified"}, {"error", e.what()}};
    text << "threshold not certified: " << e.what() << "\n";
    r.exit_code = 1;
  }
  r.files.push_back(write_file(opts.out_dir, "threshold.json", dump(j)));
  r.summary = text.str();
  return r;
}

CommandResult command_check(const Scenario& s, const CommandOptions& opts) {
  const auto lin = s.linearization();
  const auto grid = s.grid();
  const auto fopts = s.floquet_options();
  const Eigen::Index n = lin.dimension();

  std::vector<ConditionCertificate> certs;
  certs.push_back(check_condition_A(lin, 1e-8, fopts));
  certs.push_back(check_B1(lin, grid, std::nullopt, fopts));
  certs.push_back(check_B2(lin, grid, std::nullopt, fopts));
  certs.push_back(check_B3(lin, grid, MatrixXd::Zero(n, n), MatrixXd::Zero(n, n), 1e-9, fopts));
  json list = json::array();
  std::optional<json> lemma3;
  if (s.insect) {
    const auto& u = s.insect->unfavorable;
    const auto& f = s.insect->favorable;
    certs.push_back(check_hyp_parameters(u, f));
    certs.push_back(check_hyp_alternative(u, f));
    certs.push_back(theorem3_certificate(u, f, s.period, grid));
    const MatrixXd m = monodromy(lin, s.theta.value_or(0.5));
    if ((m.array() > 0).all()) {
      const auto l3 = lemma3_left_eigenvector_order(m);
      lemma3 = json{{"condition", "LEMMA3"},
                    {"theta", s.theta.value_or(0.5)},
                    {"eigen_order", l3.eigen_order},
                    {"column_inequality", l3.column_inequality},
                    {"boundary", l3.boundary}};
    }
  }
  std::ostringstream text;
  for (const auto& c : certs) {
    list.push_back(certificate_json(c));
    text << to_string(c.condition) << (c.holds ? " holds" : " fails") << " (worst margin "
         << format_number(c.worst_margin()) << ")\n";
  }
  if (lemma3) {
    list.push_back(*lemma3);
    text << "LEMMA3 eigen order " << ((*lemma3)["eigen_order"].get<bool>() ? "true" : "false")
         << ", column inequality " << ((*lemma3)["column_inequality"].get<bool>() ? "true" : "false") << "\n";
  }
  CommandResult r;
  r.files.push_back(write_file(opts.out_dir, "certificates.json", dump(list)));
  r.summary = text.str();
  return r;
}

CommandResult command_simulate(const Scenario& s, const CommandOptions& opts) {
  const double theta = require_theta(s);
  const auto system = s.system(theta);
  const auto sim = simulation_options(s);
  const auto traj = integrate(system, VectorXd::Ones(system.dimension()), 0.0, opts.periods * s.period,
                              sim.step_for(s.period), sim.divergence_bound);
  std::ostringstream csv;
  csv << "time";
  if (s.insect) {
    csv << ",J,A";
  } else {
    for (Eigen::Index i = 0; i < system.dimension(); ++i) csv << ",x" << (i + 1);
  }
  csv << ",season\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    csv << format_number(traj.times[i]);
    for (Eigen::Index c = 0; c < traj.states[i].size(); ++c) csv << ',' << format_number(traj.states[i](c));
    csv << ',' << traj.season_tags[i] << '\n';
  }
  CommandResult r;
  r.files.push_back(write_file(opts.out_dir, "trajectory.csv", csv.str()));
  std::ostringstream text;
  text << "trajectory: " << traj.times.size() << " samples" << (traj.diverged ? ", diverged" : "") << "\n";
  r.summary = text.str();
  return r;
}

CommandResult command_poincare(const Scenario& s, const CommandOptions& opts) {
  const double theta = require_theta(s);
  const auto system = s.system(theta);
  const auto res = find_periodic_orbit(system, VectorXd::Ones(system.dimension()), simulation_options(s));
  const json j = {{"fixed_point", vector_json(res.fixed_point)},
                  {"residual", res.residual},
                  {"iterations", res.iterations},
                  {"classification", to_string(res.classification)},
                  {"multiplier_lambda", res.multiplier_lambda},
                  {"note", res.note}};
  CommandResult r;
  r.files.push_back(write_file(opts.out_dir, "poincare.json", dump(j)));
  r.summary = "poincare: " + to_string(res.classification) + ", lambda = " + format_number(res.multiplier_lambda) + "\n";
  return r;
}

CommandResult command_split(const Scenario& s, const CommandOptions& opts) {
  if (!s.split) throw UsageError("missing required key: split");
  const double theta = require_theta(s);
  const auto lin = s.linearization();
  const MatrixXd m1 = s.period * lin.m1();
  const MatrixXd m2 = s.period * lin.m2();
  const auto best = optimize_split(m1, m2, theta, s.split->k, s.split->mode, s.split->resolution, 2'000'000, opts.seed);
  const json j = {{"K", s.split->k},
                  {"mode", to_string(s.split->mode)},
                  {"theta", theta},
                  {"rho", best.rho},
                  {"sigma", best.schedule.sigma},
                  {"sigma_prime", best.schedule.sigma_prime},
                  {"resolution", best.resolution},
                  {"evaluated", best.evaluated},
                  {"heuristic", best.heuristic},
                  {"note", best.note}};
  CommandResult r;
  r.files.push_back(write_file(opts.out_dir, "split.json", dump(j)));
  r.summary = "split " + to_string(s.split->mode) + ": rho = " + format_number(best.rho) + "\n";
  return r;
}

struct CheckRow {
  std::string name;
  bool passed;
  std::string detail;
};

CommandResult command_verify(const Scenario& s, const CommandOptions& opts) {
  const auto lin = s.linearization();
  const auto fopts = s.floquet_options();
  std::vector<CheckRow> rows;
  auto add = [&](std::string name, bool ok, double value) { rows.push_back({std::move(name), ok, format_number(value)}); };

  // Analytic derivatives against finite differences.
  {
    double worst1 = 0, worst2 = 0;
    for (int i = 1; i <= 9; ++i) {
      const double th = 0.1 * i;
      const auto d = rho_derivatives(lin, th, fopts);
      const double h1 = 1e-5, h2 = 1e-4;
      const double fd1 = (rho(lin, th + h1, fopts).rho - rho(lin, th - h1, fopts).rho) / (2 * h1);
      const double fd2 = (rho(lin, th + h2, fopts).rho - 2 * d.rho + rho(lin, th - h2, fopts).rho) / (h2 * h2);
      worst1 = std::max(worst1, std::abs(d.rho_prime - fd1) / std::max(1.0, std::abs(d.rho_prime)));
      worst2 = std::max(worst2, std::abs(d.rho_second - fd2) / std::max(1.0, std::abs(d.rho_second)));
    }
    add("rho_prime matches finite differences", worst1 <= 1e-6, worst1);
    add("rho_second matches finite differences", worst2 <= 1e-4, worst2);
  }

  const auto grid = s.grid();
  const auto mono = monotone_certificate(lin, grid, fopts);
  rows.push_back({"rho strictly decreasing on the grid", mono.holds, mono.detail});

  ThresholdOptions topts;
  topts.tol = s.tolerances.bisect_tol;
  topts.override_certificate = true;
  topts.floquet = fopts;
  const auto thr = find_threshold(lin, topts);
  if (thr.regime == Regime::InteriorRoot) {
    add("rho(theta*) = 1", std::abs(thr.rho_at_threshold - 1.0) <= 1e-10, thr.rho_at_threshold - 1.0);
  }

  // Variational multiplier against the monodromy.
  {
    double worst = 0;
    for (int i = 0; i <= 10; ++i) {
      const double th = 0.1 * i;
      const auto system = s.system(th);
      const auto dp = poincare_jacobian(system, VectorXd::Zero(system.dimension()), s.tolerances.ode_step);
      const double reference = rho(lin, th, fopts).rho;
      worst = std::max(worst, std::abs(spectral_radius(dp.jacobian) - reference) / reference);
    }
    add("rho(DP(0)) matches the monodromy", worst <= 1e-6, worst);
  }

  // Comparison lemmas at the scenario fraction.
  {
    const double th = s.theta.value_or(0.5);
    const auto system = s.system(th);
    const auto samples = default_samples(system.dimension(), opts.seed);
    const auto rep = verify_appendix_lemmas(system, samples, s.tolerances.ode_step);
    add("Poincare map preserves nonnegativity", rep.nonnegativity.holds, rep.nonnegativity.margin);
    add("Poincare map preserves order", rep.order.holds, rep.order.margin);
    add("DP(0) >> 0 and DP(x) >= 0", rep.jacobian_positive.holds, rep.jacobian_positive.margin);
    add("DP decreasing along ordered pairs", rep.jacobian_decreasing.holds, rep.jacobian_decreasing.margin);
  }

  // Left-eigenvector ordering of random positive 2x2 matrices.
  {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> entry(0.01, 10.0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      Eigen::Matrix2d m;
      for (int k = 0; k < 4; ++k) m(k / 2, k % 2) = entry(rng);
      const auto l3 = lemma3_left_eigenvector_order(m);
      if (!l3.boundary && l3.eigen_order != l3.column_inequality) ++mismatches;
    }
    add("left eigenvector order equals column-sum order", mismatches == 0, static_cast<double>(mismatches));
  }

  if (s.insect) {
    const auto& u = s.insect->unfavorable;
    const auto& f = s.insect->favorable;
    const auto cert = theorem3_certificate(u, f, s.period, grid);
    add("insect threshold certificate", cert.holds, cert.worst_margin());
    for (const auto* p : {&u, &f}) {
      if (insect::r0(*p) > 1.0 && p->c_J > 0) {
        const auto star = insect::positive_steady_state(*p);
        const double res = insect::vector_field(*p, star).norm();
        add(std::string("positive equilibrium of the ") + (p == &u ? "unfavorable" : "favorable") + " season",
            res <= 1e-12 * (1.0 + star.norm()), res);
      }
    }
  }

  // Long-period correction.
  {
    const std::vector<double> periods{1, 2, 4, 8, 16, 32};
    const auto ts = timescale_asymptotics(lin, 0.5, periods, 1e-6, 1e-12, fopts);
    add("long-period correction converges", ts.differences_shrinking && ts.successive_differences.back() < 1e-4,
        ts.final_error);
    add("short-period rho near 1", std::abs(ts.rho_small_period - 1.0) <= 1e-5, ts.rho_small_period - 1.0);
  }

  std::ostringstream csv, text;
  csv << "check,passed,detail\n";
  std::size_t failed = 0;
  for (const auto& row : rows) {
    csv << '"' << row.name << "\"," << (row.passed ? "true" : "false") << ",\"" << row.detail << "\"\n";
    text << (row.passed ? "PASS " : "FAIL ") << row.name << " (" << row.detail << ")\n";
    failed += row.passed ? 0 : 1;
  }
  text << rows.size() - failed << "/" << rows.size() << " checks passed\n";
  CommandResult r;
  r.files.push_back(write_file(opts.out_dir, "verify.csv", csv.str()));
  r.summary = text.str();
  return r;
}

}  // namespace

std::vector<double> Scenario::grid() const {
  if (grid_values) return *grid_values;
  return uniform_grid(grid_count.value_or(101));
}

TwoSeasonLinearization Scenario::linearization() const {
  if (insect) return insect::linearization(insect->unfavorable, insect->favorable, period);
  if (matrices) return {matrices->m1, matrices->m2, period};
  throw UsageError("missing required key: insect or matrices");
}

SeasonalSystem Scenario::system(double theta) const {
  if (insect) return insect::as_seasonal_system(insect->unfavorable, insect->favorable, theta, period);
  if (!matrices) throw UsageError("missing required key: insect or matrices");
  SeasonalSchedule schedule(period, {0.0, theta, 1.0});
  return SeasonalSystem(schedule, {make_linear_piece(matrices->m1), make_linear_piece(matrices->m2)});
}

FloquetOptions Scenario::floquet_options() const {
  FloquetOptions o;
  o.perron_tol = tolerances.perron_tol;
  return o;
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, {"mode", "period_T", "insect", "matrices", "theta", "theta_grid", "tolerances", "split"}, "");

  Scenario s;
  if (!root.contains("mode") || !root["mode"].is_string()) throw ParseError("mode: expected \"insect\" or \"matrices\"");
  const auto mode = root["mode"].get<std::string>();
  if (mode == "insect") {
    s.mode = ScenarioMode::Insect;
  } else if (mode == "matrices") {
    s.mode = ScenarioMode::Matrices;
  } else {
    throw ParseError("mode: expected \"insect\" or \"matrices\"");
  }
  const bool has_insect = root.contains("insect");
  const bool has_matrices = root.contains("matrices");
  if (has_insect == has_matrices) throw ParseError("mode: exactly one of insect or matrices must be given");
  if (has_insect != (s.mode == ScenarioMode::Insect)) throw ParseError("mode: does not match the populated section");

  if (root.contains("period_T")) s.period = positive_at(root, "period_T", "");

  if (has_insect) {
    const auto& node = root["insect"];
    check_keys(node, {"piU", "piF"}, "insect");
    if (!node.contains("piU")) throw ParseError("insect.piU: missing");
    if (!node.contains("piF")) throw ParseError("insect.piF: missing");
    s.insect = InsectPair{parse_params(node["piU"], "insect.piU"), parse_params(node["piF"], "insect.piF")};
  } else {
    const auto& node = root["matrices"];
    check_keys(node, {"m1", "m2"}, "matrices");
    if (!node.contains("m1")) throw ParseError("matrices.m1: missing");
    if (!node.contains("m2")) throw ParseError("matrices.m2: missing");
    MatrixPair pair{parse_matrix(node["m1"], "matrices.m1"), parse_matrix(node["m2"], "matrices.m2")};
    if (pair.m1.rows() != pair.m2.rows()) throw ParseError("matrices.m2: size differs from m1");
    s.matrices = std::move(pair);
  }

  if (root.contains("theta")) s.theta = fraction_value(root["theta"], "theta");

  if (root.contains("theta_grid")) {
    const auto& g = root["theta_grid"];
    if (g.is_number_integer()) {
      const auto count = g.get<long long>();
      if (count < 2) throw ParseError("theta_grid: a count must be at least 2");
      s.grid_count = static_cast<std::size_t>(count);
    } else if (g.is_array()) {
      std::vector<double> values;
      for (const auto& v : g) values.push_back(fraction_value(v, "theta_grid"));
      if (values.empty()) throw ParseError("theta_grid: list is empty");
      s.grid_values = std::move(values);
    } else {
      throw ParseError("theta_grid: expected a count or a list of fractions");
    }
  }

  if (root.contains("tolerances")) {
    const auto& t = root["tolerances"];
    check_keys(t, {"perron_tol", "bisect_tol", "ode_step", "extinction_threshold", "divergence_bound"}, "tolerances");
    if (t.contains("perron_tol")) s.tolerances.perron_tol = positive_at(t, "perron_tol", "tolerances");
    if (t.contains("bisect_tol")) s.tolerances.bisect_tol = positive_at(t, "bisect_tol", "tolerances");
    if (t.contains("ode_step")) {
      s.tolerances.ode_step = number_at(t, "ode_step", "tolerances");
      if (s.tolerances.ode_step < 0) throw ParseError("tolerances.ode_step: must be nonnegative");
    }
    if (t.contains("extinction_threshold")) {
      s.tolerances.extinction_threshold = positive_at(t, "extinction_threshold", "tolerances");
    }
    if (t.contains("divergence_bound")) s.tolerances.divergence_bound = positive_at(t, "divergence_bound", "tolerances");
  }

  if (root.contains("split")) {
    const auto& sp = root["split"];
    check_keys(sp, {"K", "resolution", "mode"}, "split");
    SplitConfig c;
    if (sp.contains("K")) c.k = integer_at(sp, "K", "split", 1);
    if (sp.contains("resolution")) c.resolution = integer_at(sp, "resolution", "split", 1);
    if (sp.contains("mode")) {
      const auto& m = sp["mode"];
      if (!m.is_string() || (m != "max" && m != "min")) throw ParseError("split.mode: expected \"max\" or \"min\"");
      c.mode = m == "max" ? SplitMode::Max : SplitMode::Min;
    }
    s.split = c;
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string dump_scenario(const Scenario& s) {
  json root;
  root["mode"] = s.mode == ScenarioMode::Insect ? "insect" : "matrices";
  root["period_T"] = s.period;
  if (s.insect) root["insect"] = {{"piU", params_json(s.insect->unfavorable)}, {"piF", params_json(s.insect->favorable)}};
  if (s.matrices) root["matrices"] = {{"m1", matrix_json(s.matrices->m1)}, {"m2", matrix_json(s.matrices->m2)}};
  if (s.theta) root["theta"] = *s.theta;
  if (s.grid_values) {
    root["theta_grid"] = *s.grid_values;
  } else if (s.grid_count) {
    root["theta_grid"] = *s.grid_count;
  }
  root["tolerances"] = {{"perron_tol", s.tolerances.perron_tol},
                        {"bisect_tol", s.tolerances.bisect_tol},
                        {"ode_step", s.tolerances.ode_step},
                        {"extinction_threshold", s.tolerances.extinction_threshold},
                        {"divergence_bound", s.tolerances.divergence_bound}};
  if (s.split) {
    root["split"] = {{"K", s.split->k}, {"resolution", s.split->resolution}, {"mode", to_string(s.split->mode)}};
  }
  return dump(root);
}

std::string format_number(double value) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17) << value;
  return out.str();
}

SweepOutput run_sweep(const Scenario& s, bool with_simulation) {
  const auto lin = s.linearization();
  const auto fopts = s.floquet_options();
  SweepOutput out;
  std::ostringstream csv;
  csv << "theta,rho,rho_prime,rho_second,classification,lambda_simulated,error\n";
  for (double theta : s.grid()) {
    csv << format_number(theta) << ',';
    try {
      const auto d = rho_derivatives(lin, theta, fopts);
      csv << format_number(d.rho) << ',' << format_number(d.rho_prime) << ',' << format_number(d.rho_second) << ','
          << classify_rho(d.rho) << ',';
      if (with_simulation) {
        const auto system = s.system(theta);
        const auto dp = poincare_jacobian(system, VectorXd::Zero(system.dimension()), s.tolerances.ode_step,
                                          s.tolerances.divergence_bound);
        csv << format_number(spectral_radius(dp.jacobian));
      }
      csv << ",\n";
    } catch (const Error& e) {
      ++out.row_errors;
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), '"', '\'');
      csv << ",,,,,\"" << msg << "\"\n";
    }
  }
  out.csv = csv.str();
  return out;
}

CommandResult run_command(const std::string& name, const Scenario& s, const CommandOptions& opts) {
  if (name == "floquet") return command_floquet(s, opts);
  if (name == "threshold") return command_threshold(s, opts);
  if (name == "check") return command_check(s, opts);
  if (name == "simulate") return command_simulate(s, opts);
  if (name == "poincare") return command_poincare(s, opts);
  if (name == "split") return command_split(s, opts);
  if (name == "verify") return command_verify(s, opts);
  throw UsageError("unknown command: " + name);
}

}  // namespace seasonal
