#include "seasonal/floquet.hpp"

#include <cmath>
#include <sstream>

namespace seasonal {

TwoSeasonLinearization::TwoSeasonLinearization(MatrixXd unfavorable, MatrixXd favorable, double period)
    : m1_(std::move(unfavorable)), m2_(std::move(favorable)), period_(period) {
  require_square(m1_, "linearization m1");
  require_square(m2_, "linearization m2");
  if (m1_.rows() != m2_.rows()) throw InvalidInput("linearization: m1 and m2 differ in size");
  if (!(period_ > 0) || !std::isfinite(period_)) throw InvalidInput("linearization: period must be positive");
  if (!is_metzler(m1_) || !is_metzler(m2_)) throw StructureError("linearization: matrices must be Metzler");
  if (!is_irreducible(m1_) || !is_irreducible(m2_)) {
    throw StructureError("linearization: matrices must be irreducible");
  }
  s_ = m1_ - m2_;
}

namespace {

void require_fraction(double theta, const char* what) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput(std::string(what) + ": theta must lie in [0, 1]");
}

}  // namespace

MatrixXd monodromy(const TwoSeasonLinearization& lin, double theta) {
  require_fraction(theta, "monodromy");
  const double t = lin.period();
  return mat_exp(((1.0 - theta) * t) * lin.m2()) * mat_exp((theta * t) * lin.m1());
}

MatrixXd monodromy_general(const SeasonalSystem& system) {
  const auto& schedule = system.schedule();
  const Eigen::Index n = system.dimension();
  MatrixXd product = MatrixXd::Identity(n, n);
  for (std::size_t k = 0; k < schedule.season_count(); ++k) {
    const double duration = schedule.fraction(k) * schedule.period();
    if (duration == 0.0) continue;
    product = mat_exp(duration * system.piece(k).linearization_at_zero) * product;
  }
  return product;
}

RhoEval rho(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts) {
  RhoEval out;
  out.monodromy = monodromy(lin, theta);
  out.pair = perron_pair(out.monodromy, opts.perron_tol, opts.perron_max_iter);
  out.rho = out.pair.rho;
  return out;
}

VectorXd constrained_resolvent(const MatrixXd& m, double rho, const VectorXd& v, const VectorXd& v_star,
                               const VectorXd& b, ResolventSide side) {
  require_square(m, "constrained_resolvent");
  const Eigen::Index n = m.rows();
  if (v.size() != n || v_star.size() != n || b.size() != n) {
    throw InvalidInput("constrained_resolvent: dimension mismatch");
  }
  const bool right = side == ResolventSide::Right;
  // The image of M - rho I is orthogonal to v_star; that of M^T - rho I to v.
  const VectorXd& image_normal = right ? v_star : v;
  const double misfit = std::abs(b.dot(image_normal));
  if (misfit > 1e-9 * std::max(1.0, b.norm() * image_normal.norm())) {
    throw InvalidInput("constrained_resolvent: right-hand side is not in the image hyperplane");
  }

  MatrixXd bordered = MatrixXd::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = right ? MatrixXd(m) : MatrixXd(m.transpose());
  bordered.topLeftCorner(n, n).diagonal().array() -= rho;
  bordered.block(0, n, n, 1) = image_normal;
  bordered.block(n, 0, 1, n) = v.transpose();

  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs.head(n) = b;
  const Eigen::PartialPivLU<MatrixXd> lu(bordered);
  if (!(lu.rcond() > 1e-13)) {
    throw ConditioningError("constrained_resolvent: bordered system is singular");
  }
  const VectorXd solution = lu.solve(rhs);
  return solution.head(n);
}

RhoDerivatives rho_derivatives(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts) {
  const RhoEval eval = rho(lin, theta, opts);
  const VectorXd& v = eval.pair.v;
  const VectorXd& v_star = eval.pair.v_star;
  const MatrixXd& s = lin.s();
  const double t = lin.period();

  const VectorXd sv = s * v;
  const double r = sv.dot(v_star);

  // (Pi - I) S^T V* with Pi = V* V^T; lies in the hyperplane orthogonal to V.
  const VectorXd st_vstar = s.transpose() * v_star;
  const VectorXd projected = v_star * v.dot(st_vstar) - st_vstar;
  const VectorXd resolved =
      constrained_resolvent(eval.monodromy, eval.rho, v, v_star, projected, ResolventSide::Adjoint);

  const double commutator = ((lin.m2() * s - s * lin.m1()) * v).dot(v_star);
  const double bracket = 2.0 * r * r + commutator + 2.0 * eval.rho * resolved.dot(sv);

  RhoDerivatives out;
  out.theta = theta;
  out.rho = eval.rho;
  out.rho_prime = t * eval.rho * r;
  out.rho_second = t * t * eval.rho * bracket;
  out.pair = eval.pair;
  return out;
}

double rho_prime(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts) {
  const RhoEval eval = rho(lin, theta, opts);
  return lin.period() * eval.rho * (lin.s() * eval.pair.v).dot(eval.pair.v_star);
}

double rho_second(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts) {
  return rho_derivatives(lin, theta, opts).rho_second;
}

RhoProfile rho_profile(const TwoSeasonLinearization& lin, std::span<const double> thetas,
                       const FloquetOptions& opts) {
  RhoProfile profile;
  for (const double theta : thetas) {
    const RhoDerivatives d = rho_derivatives(lin, theta, opts);
    profile.thetas.push_back(theta);
    profile.rho.push_back(d.rho);
    profile.rho_prime.push_back(d.rho_prime);
    profile.rho_second.push_back(d.rho_second);
    profile.perron_pairs.push_back(d.pair);
  }
  return profile;
}

std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw InvalidInput("uniform_grid: need at least two points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

MonotoneCertificate monotone_certificate(const TwoSeasonLinearization& lin, std::span<const double> grid,
                                         const FloquetOptions& opts) {
  MonotoneCertificate cert;
  std::vector<double> values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const RhoEval eval = rho(lin, grid[i], opts);
    const double slope = lin.period() * eval.rho * (lin.s() * eval.pair.v).dot(eval.pair.v_star);
    if (!(slope < 0)) {
      std::ostringstream msg;
      msg << "rho' = " << slope << " is not negative at theta = " << grid[i];
      cert.violating_cell = i + 1 < grid.size() ? i : (i == 0 ? 0 : i - 1);
      cert.detail = msg.str();
      return cert;
    }
    values.push_back(eval.rho);
    if (i > 0 && !(values[i] < values[i - 1])) {
      std::ostringstream msg;
      msg << "rho does not decrease on [" << grid[i - 1] << ", " << grid[i] << "]";
      cert.violating_cell = i - 1;
      cert.detail = msg.str();
      return cert;
    }
  }
  cert.holds = true;
  cert.detail = "rho strictly decreasing with negative derivative on the grid";
  return cert;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::InteriorRoot:
      return "interior_root";
    case Regime::AlwaysExtinct:
      return "always_extinct";
    case Regime::AlwaysPersistent:
      return "always_persistent";
  }
  return "unknown";
}

ThresholdReport find_threshold(const TwoSeasonLinearization& lin, const ThresholdOptions& opts) {
  if (!(opts.tol > 0)) throw InvalidInput("find_threshold: tol must be positive");
  ThresholdReport report;
  report.rho_at_zero = rho(lin, 0.0, opts.floquet).rho;
  report.rho_at_one = rho(lin, 1.0, opts.floquet).rho;
  const auto grid = uniform_grid(opts.grid_points);
  const MonotoneCertificate cert = monotone_certificate(lin, grid, opts.floquet);
  report.monotone_certificate = cert.holds;
  report.certificate_detail = cert.detail;

  if (report.rho_at_zero <= 1.0) {
    report.regime = Regime::AlwaysExtinct;
    report.theta_star = 0.0;
    report.bracket_lo = report.bracket_hi = 0.0;
    report.rho_at_threshold = report.rho_at_zero;
    return report;
  }
  if (report.rho_at_one > 1.0) {
    report.regime = Regime::AlwaysPersistent;
    report.theta_star = 1.0;
    report.bracket_lo = report.bracket_hi = 1.0;
    report.rho_at_threshold = report.rho_at_one;
    return report;
  }
  if (!cert.holds && !opts.override_certificate) {
    std::ostringstream msg;
    msg << "find_threshold: monotonicity certificate failed in grid cell " << cert.violating_cell.value_or(0)
        << ": " << cert.detail;
    throw CertificateError(msg.str());
  }

  report.regime = Regime::InteriorRoot;
  double lo = 0.0;
  double hi = 1.0;
  double mid = 0.5;
  double value = 0.0;
  for (report.iterations = 1; report.iterations <= opts.max_iter; ++report.iterations) {
    mid = 0.5 * (lo + hi);
    value = rho(lin, mid, opts.floquet).rho;
    if (std::abs(value - 1.0) <= opts.tol) break;
    if (value > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon()) break;
  }
  report.theta_star = mid;
  report.rho_at_threshold = value;
  report.bracket_lo = lo;
  report.bracket_hi = hi;
  return report;
}

LogConvexityReport log_convexity_probe(const TwoSeasonLinearization& lin, std::span<const double> grid,
                                       const FloquetOptions& opts) {
  LogConvexityReport report;
  for (const double theta : grid) {
    require_fraction(theta, "log_convexity_probe");
    report.thetas.push_back(theta);
    report.log_rho.push_back(std::log(rho(lin, theta, opts).rho));
  }
  report.worst_second_difference = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < report.log_rho.size(); ++i) {
    const double d2 = report.log_rho[i + 1] - 2.0 * report.log_rho[i] + report.log_rho[i - 1];
    report.second_differences.push_back(d2);
    report.worst_second_difference = std::min(report.worst_second_difference, d2);
  }
  report.log_convex = report.second_differences.empty() || report.worst_second_difference >= -1e-9;

  const auto first = principal_eigen(lin.m1(), opts.perron_tol);
  const auto second = principal_eigen(lin.m2(), opts.perron_tol);
  const double left = second.abscissa - (lin.m1() * second.v).dot(second.v_star);
  const double right = (lin.m2() * first.v).dot(first.v_star) - first.abscissa;
  report.endpoint_condition = left * right;
  report.endpoint_condition_positive = report.endpoint_condition > 0;
  return report;
}

TimescaleReport timescale_asymptotics(const TwoSeasonLinearization& lin, double theta,
                                      std::span<const double> periods, double small_period, double floor,
                                      const FloquetOptions& opts) {
  require_fraction(theta, "timescale_asymptotics");
  TimescaleReport report;
  report.theta = theta;
  const auto unfav = principal_eigen(lin.m1(), opts.perron_tol);
  const auto fav = principal_eigen(lin.m2(), opts.perron_tol);
  const Eigen::Index n = lin.dimension();
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd m1_shifted = lin.m1() - unfav.abscissa * id;
  const MatrixXd m2_shifted = lin.m2() - fav.abscissa * id;
  const double interpolation = theta * unfav.abscissa + (1.0 - theta) * fav.abscissa;

  double previous_period = 0.0;
  for (const double period : periods) {
    if (!(period > previous_period)) throw InvalidInput("timescale_asymptotics: periods must increase");
    previous_period = period;
    const MatrixXd rescaled =
        mat_exp(((1.0 - theta) * period) * m2_shifted) * mat_exp((theta * period) * m1_shifted);
    const double log_rescaled = std::log(perron_pair(rescaled, opts.perron_tol, opts.perron_max_iter).rho);
    report.rows.push_back({period, log_rescaled / period + interpolation, interpolation, log_rescaled});
  }

  // theta = 0 is the favorable regime alone, theta = 1 the unfavorable one.
  report.limit_correction = std::log(fav.v_star.dot(unfav.v) * unfav.v_star.dot(fav.v));

  report.differences_shrinking = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    report.successive_differences.push_back(std::abs(report.rows[i].correction - report.rows[i - 1].correction));
  }
  for (std::size_t i = 1; i < report.successive_differences.size(); ++i) {
    const double now = report.successive_differences[i];
    if (now > floor && now > report.successive_differences[i - 1]) report.differences_shrinking = false;
  }
  if (!report.rows.empty()) {
    report.final_error = std::abs(report.rows.back().correction - report.limit_correction);
  }

  report.small_period = small_period;
  report.rho_small_period = rho(lin.with_period(small_period), theta, opts).rho;
  return report;
}

}  // namespace seasonal
