#include "seasonal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seasonal/linalg.hpp"

namespace seasonal {

namespace {

constexpr double kClampFloor = -1e-10;
constexpr double kStrictSlack = 1e-9;

struct Segment {
  double start = 0;
  double end = 0;
  std::size_t season = 0;
};

// Splits [t0, t1] at every season boundary.
std::vector<Segment> season_segments(const SeasonalSchedule& schedule, double t0, double t1) {
  std::vector<Segment> out;
  const double period = schedule.period();
  const auto& cuts = schedule.breakpoints();
  const std::size_t seasons = schedule.season_count();
  const double slack = 1e-13 * std::max(1.0, std::abs(t1));

  double n = std::floor(t0 / period);
  std::size_t k = schedule.season_index(t0);
  double t = t0;
  while (t < t1 - slack) {
    const double end = std::min(t1, (n + cuts[k + 1]) * period);
    if (end > t) out.push_back({t, end, k});
    t = std::max(t, end);
    do {
      if (++k == seasons) {
        k = 0;
        n += 1;
      }
    } while (schedule.fraction(k) == 0.0);
  }
  if (!out.empty()) out.back().end = t1;
  return out;
}

template <typename Rhs>
VectorXd rk4_step(const Rhs& f, const VectorXd& y, double h) {
  const VectorXd k1 = f(y);
  const VectorXd k2 = f(y + 0.5 * h * k1);
  const VectorXd k3 = f(y + 0.5 * h * k2);
  const VectorXd k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Resets entries in [kClampFloor, 0) of the first `count` coordinates.
std::size_t clamp_small_negatives(VectorXd& y, Eigen::Index count) {
  std::size_t clamped = 0;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (y(i) < 0.0 && y(i) >= kClampFloor) {
      y(i) = 0.0;
      ++clamped;
    }
  }
  return clamped;
}

void require_step(double step, const char* what) {
  if (!(step > 0) || !std::isfinite(step)) throw InvalidInput(std::string(what) + ": step must be positive");
}

void require_state(const SeasonalSystem& system, const VectorXd& x, const char* what) {
  if (x.size() != system.dimension()) throw InvalidInput(std::string(what) + ": state has the wrong dimension");
  require_finite(x, what);
  if ((x.array() < 0.0).any()) throw InvalidInput(std::string(what) + ": state must be nonnegative");
}

// One period of the base or augmented flow. `augmented` appends vec(X).
struct PeriodFlow {
  VectorXd state;
  bool diverged = false;
};

PeriodFlow flow_one_period(const SeasonalSystem& system, VectorXd y, bool augmented, double step,
                           double divergence_bound) {
  const Eigen::Index n = system.dimension();
  for (const auto& seg : season_segments(system.schedule(), 0.0, system.period())) {
    const auto& piece = system.piece(seg.season);
    const auto steps = static_cast<long>(std::ceil((seg.end - seg.start) / step - 1e-9));
    const double h = (seg.end - seg.start) / static_cast<double>(std::max(1L, steps));
    for (long i = 0; i < std::max(1L, steps); ++i) {
      if (augmented) {
        auto rhs = [&](const VectorXd& z) {
          VectorXd out(z.size());
          const VectorXd x = z.head(n);
          out.head(n) = piece.vector_field(x);
          const Eigen::Map<const MatrixXd> tangent(z.data() + n, n, n);
          Eigen::Map<MatrixXd>(out.data() + n, n, n) = piece.jacobian(x) * tangent;
          return out;
        };
        y = rk4_step(rhs, y, h);
      } else {
        y = rk4_step(piece.vector_field, y, h);
      }
      clamp_small_negatives(y, n);
      const double norm = y.head(n).norm();
      if (!(norm <= divergence_bound)) return {y, true};
    }
  }
  return {y, false};
}

}  // namespace

Trajectory integrate(const SeasonalSystem& system, const VectorXd& x0, double t0, double t1, double step,
                     double divergence_bound) {
  require_state(system, x0, "integrate");
  require_step(step, "integrate");
  if (!(t1 >= t0) || !std::isfinite(t0) || !std::isfinite(t1) || t0 < 0) {
    throw InvalidInput("integrate: need 0 <= t0 <= t1");
  }
  Trajectory out;
  out.times.push_back(t0);
  out.states.push_back(x0);
  out.season_tags.push_back(system.schedule().season_index(t0));

  VectorXd y = x0;
  for (const auto& seg : season_segments(system.schedule(), t0, t1)) {
    const auto& field = system.piece(seg.season).vector_field;
    const auto steps = std::max(1L, static_cast<long>(std::ceil((seg.end - seg.start) / step - 1e-9)));
    const double h = (seg.end - seg.start) / static_cast<double>(steps);
    for (long i = 0; i < steps; ++i) {
      y = rk4_step(field, y, h);
      out.clamped_entries += clamp_small_negatives(y, y.size());
      out.times.push_back(i + 1 == steps ? seg.end : seg.start + (i + 1) * h);
      out.states.push_back(y);
      out.season_tags.push_back(seg.season);
      if (!(y.norm() <= divergence_bound)) {
        out.diverged = true;
        return out;
      }
    }
  }
  return out;
}

VectorXd poincare_map(const SeasonalSystem& system, const VectorXd& x, double step, double divergence_bound) {
  require_state(system, x, "poincare_map");
  const double h = step > 0 ? step : system.period() / 2000.0;
  require_step(h, "poincare_map");
  auto flow = flow_one_period(system, x, false, h, divergence_bound);
  if (flow.diverged) throw DivergenceError("poincare_map: state norm exceeded the divergence bound");
  return flow.state;
}

PoincareJacobian poincare_jacobian(const SeasonalSystem& system, const VectorXd& x, double step,
                                   double divergence_bound) {
  require_state(system, x, "poincare_jacobian");
  const double h = step > 0 ? step : system.period() / 2000.0;
  require_step(h, "poincare_jacobian");
  const Eigen::Index n = system.dimension();
  VectorXd y(n + n * n);
  y.head(n) = x;
  Eigen::Map<MatrixXd>(y.data() + n, n, n).setIdentity();
  auto flow = flow_one_period(system, y, true, h, divergence_bound);
  if (flow.diverged) throw DivergenceError("poincare_jacobian: state norm exceeded the divergence bound");
  return {flow.state.head(n), Eigen::Map<const MatrixXd>(flow.state.data() + n, n, n)};
}

std::string to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Extinction: return "extinction";
    case OrbitClass::PeriodicPositive: return "periodic_positive";
    case OrbitClass::Divergent: return "divergent";
    case OrbitClass::Undecided: return "undecided";
  }
  return "?";
}

PoincareResult find_periodic_orbit(const SeasonalSystem& system, const VectorXd& x0, const SimulationOptions& opts) {
  require_state(system, x0, "find_periodic_orbit");
  const double step = opts.step_for(system.period());
  PoincareResult out;

  const auto dp0 = poincare_jacobian(system, VectorXd::Zero(system.dimension()), step, opts.divergence_bound);
  out.multiplier_lambda = spectral_radius(dp0.jacobian);

  VectorXd x = x0;
  int quiet_periods = 0;
  for (int it = 1; it <= opts.max_periods; ++it) {
    auto flow = flow_one_period(system, x, false, step, opts.divergence_bound);
    out.iterations = it;
    out.residual = (flow.state - x).norm();
    x = flow.state;
    if (flow.diverged) {
      out.classification = OrbitClass::Divergent;
      out.note = "norm passed the divergence bound; a proxy for unbounded growth";
      break;
    }
    quiet_periods = x.norm() < opts.extinction_threshold ? quiet_periods + 1 : 0;
    if (quiet_periods >= opts.extinction_periods) {
      out.classification = OrbitClass::Extinction;
      break;
    }
    if (out.residual <= opts.tol && x.minCoeff() > opts.extinction_threshold) {
      out.classification = OrbitClass::PeriodicPositive;
      break;
    }
  }
  out.fixed_point = x;
  if (out.classification == OrbitClass::Undecided) {
    std::ostringstream note;
    note << "no decision after " << opts.max_periods << " periods, residual " << out.residual;
    out.note = note.str();
  }
  return out;
}

EmpiricalProbe classify_fraction(const SystemFamily& family, double theta, const EmpiricalOptions& opts) {
  const SeasonalSystem system = family(theta);
  const Eigen::Index n = system.dimension();
  EmpiricalProbe probe{theta, false, false};
  const auto orbit = find_periodic_orbit(system, VectorXd::Ones(n), opts.simulation);
  switch (orbit.classification) {
    case OrbitClass::PeriodicPositive:
    case OrbitClass::Divergent:
      probe.persistent = true;
      return probe;
    case OrbitClass::Extinction:
      return probe;
    case OrbitClass::Undecided:
      break;
  }
  // Near the threshold both searches stall; decide by whether a small
  // population grows over the trend window.
  probe.by_trend = true;
  const double step = opts.simulation.step_for(system.period());
  VectorXd x = VectorXd::Constant(n, opts.trend_start);
  const double start = x.norm();
  for (int k = 0; k < opts.trend_periods; ++k) {
    x = flow_one_period(system, x, false, step, opts.simulation.divergence_bound).state;
  }
  probe.persistent = x.norm() > start;
  return probe;
}

EmpiricalThreshold empirical_threshold(const SystemFamily& family, std::span<const double> grid,
                                       const EmpiricalOptions& opts) {
  if (grid.size() < 3) throw InvalidInput("empirical_threshold: grid needs at least 3 points");
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidInput("empirical_threshold: grid must be sorted");
  for (double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("empirical_threshold: grid fractions must lie in [0, 1]");
  }
  EmpiricalThreshold out;
  for (double theta : grid) out.grid.push_back(classify_fraction(family, theta, opts));

  std::size_t switches = 0;
  std::size_t first_extinct = out.grid.size();
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    if (!out.grid[i].persistent && first_extinct == out.grid.size()) first_extinct = i;
    if (i > 0 && out.grid[i].persistent != out.grid[i - 1].persistent) ++switches;
  }
  out.consistent = switches == 0 || (switches == 1 && out.grid.front().persistent);
  if (!out.consistent) out.note = "classification is not monotone across the grid";

  if (first_extinct == out.grid.size()) {
    out.theta_star = 1.0;
    return out;
  }
  if (first_extinct == 0) {
    out.theta_star = 0.0;
    return out;
  }
  double lo = out.grid[first_extinct - 1].theta;
  double hi = out.grid[first_extinct].theta;
  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    const auto probe = classify_fraction(family, mid, opts);
    out.refinements.push_back(probe);
    (probe.persistent ? lo : hi) = mid;
  }
  out.theta_star = 0.5 * (lo + hi);
  return out;
}

namespace {

struct SampleImage {
  VectorXd x;
  VectorXd image;
  MatrixXd jacobian;
};

}  // namespace

AppendixReport verify_appendix_lemmas(const SeasonalSystem& system, std::span<const VectorXd> samples,
                                      double step) {
  const double h = step > 0 ? step : system.period() / 2000.0;
  std::vector<SampleImage> images;
  images.reserve(samples.size());
  for (const auto& x : samples) {
    auto pj = poincare_jacobian(system, x, h);
    images.push_back({x, std::move(pj.image), std::move(pj.jacobian)});
  }
  const double inf = std::numeric_limits<double>::infinity();
  AppendixReport report;

  // Positivity of the map.
  {
    double weak = inf, strict = inf;
    for (const auto& s : images) {
      weak = std::min(weak, s.image.minCoeff());
      if ((s.x.array() > 0).any()) strict = std::min(strict, s.image.minCoeff());
    }
    auto& c = report.nonnegativity;
    c.checked = images.size();
    c.margin = strict;
    c.holds = !images.empty() && weak >= 0.0;
    c.boundary = c.holds && !(strict > kStrictSlack);
  }

  // Order preservation and the decreasing Jacobian along ordered pairs.
  {
    double order_margin = inf;
    double weakest_jacobian_gap = inf;  // most negative entry of DP(x) - DP(y)
    double strict_jacobian_gap = inf;   // worst over pairs of the largest entry
    std::size_t pairs = 0, interior_pairs = 0;
    for (const auto& lo : images) {
      for (const auto& hi : images) {
        if (!strictly_below(lo.x, hi.x)) continue;
        ++pairs;
        order_margin = std::min(order_margin, (hi.image - lo.image).minCoeff());
        if (lo.x.minCoeff() > 0) {
          ++interior_pairs;
          const MatrixXd gap = lo.jacobian - hi.jacobian;
          weakest_jacobian_gap = std::min(weakest_jacobian_gap, gap.minCoeff());
          strict_jacobian_gap = std::min(strict_jacobian_gap, gap.maxCoeff());
        }
      }
    }
    auto& o = report.order;
    o.checked = pairs;
    o.margin = order_margin;
    o.holds = pairs > 0 && order_margin > 0.0;
    o.boundary = o.holds && !(order_margin > kStrictSlack);

    auto& d = report.jacobian_decreasing;
    d.checked = interior_pairs;
    d.margin = strict_jacobian_gap;
    const bool weak = interior_pairs > 0 && weakest_jacobian_gap >= -kStrictSlack;
    d.holds = weak && strict_jacobian_gap > kStrictSlack;
    d.boundary = weak && !d.holds;
  }

  // Sign of the Jacobian.
  {
    const Eigen::Index n = system.dimension();
    const auto at_zero = poincare_jacobian(system, VectorXd::Zero(n), h);
    double weak = inf;
    for (const auto& s : images) weak = std::min(weak, s.jacobian.minCoeff());
    auto& c = report.jacobian_positive;
    c.checked = images.size() + 1;
    c.margin = std::min(at_zero.jacobian.minCoeff(), weak);
    c.holds = at_zero.jacobian.minCoeff() > kStrictSlack && weak >= 0.0;
    c.boundary = weak >= 0.0 && !c.holds;
  }
  return report;
}

}  // namespace seasonal
