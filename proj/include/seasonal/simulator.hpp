#pragma once

// Fixed-step RK4 integration of seasonal systems with mesh points on every
// season boundary, the Poincare map and its Jacobian, periodic orbits, the
// simulated extinction threshold, and sample checks of the comparison lemmas
// (positivity, order preservation, Jacobian sign and monotonicity).

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seasonal/seasonal_system.hpp"

namespace seasonal {

struct SimulationOptions {
  double step = 0;                    // 0 means period / 2000
  double extinction_threshold = 1e-9;
  int extinction_periods = 3;         // consecutive periods below the threshold
  double divergence_bound = 1e9;
  int max_periods = 2000;
  double tol = 1e-10;                 // ||P(q) - q|| for a periodic orbit

  double step_for(double period) const { return step > 0 ? step : period / 2000.0; }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXd> states;
  std::vector<std::size_t> season_tags;  // season of the step that produced the sample
  std::size_t clamped_entries = 0;       // small negative entries reset to zero
  bool diverged = false;                 // truncated at the divergence bound
};

/// Integrates from t0 to t1. Every season boundary in (t0, t1) is a sample
/// time. Entries down to -1e-10 are clamped to zero; anything more negative
/// throws InvalidInput.
Trajectory integrate(const SeasonalSystem& system, const VectorXd& x0, double t0, double t1, double step,
                     double divergence_bound = 1e9);

/// State after one period from time 0. Throws DivergenceError past `divergence_bound`.
VectorXd poincare_map(const SeasonalSystem& system, const VectorXd& x, double step = 0,
                      double divergence_bound = 1e9);

struct PoincareJacobian {
  VectorXd image;  // P(x)
  MatrixXd jacobian;  // DP(x)
};

/// DP(x), integrating X' = DF(phi) X, X(0) = I, together with the base orbit.
PoincareJacobian poincare_jacobian(const SeasonalSystem& system, const VectorXd& x, double step = 0,
                                   double divergence_bound = 1e9);

enum class OrbitClass { Extinction, PeriodicPositive, Divergent, Undecided };
std::string to_string(OrbitClass c);

struct PoincareResult {
  VectorXd fixed_point;  // last iterate
  double residual = 0;   // ||P(x) - x|| at the last iterate
  int iterations = 0;
  OrbitClass classification = OrbitClass::Undecided;
  double multiplier_lambda = 0;  // spectral radius of DP(0)
  std::string note;
};

/// Picard iteration of the Poincare map from x0.
PoincareResult find_periodic_orbit(const SeasonalSystem& system, const VectorXd& x0,
                                   const SimulationOptions& opts = {});

/// Builds the seasonal system for a given unfavorable fraction.
using SystemFamily = std::function<SeasonalSystem(double theta)>;

struct EmpiricalOptions {
  SimulationOptions simulation{.step = 0, .max_periods = 400};
  double tol = 1e-3;       // final bracket width
  int trend_periods = 60;  // window for the small-start growth rule
  double trend_start = 1e-6;
};

struct EmpiricalProbe {
  double theta = 0;
  bool persistent = false;
  bool by_trend = false;  // the orbit search was undecided
};

struct EmpiricalThreshold {
  double theta_star = 0;
  bool consistent = true;  // grid classes switch at most once, persistent first
  std::vector<EmpiricalProbe> grid;
  std::vector<EmpiricalProbe> refinements;
  std::string note;
};

/// Persistent or extinct at one fraction: orbit search from the all-ones
/// state, falling back to whether a small start grows over the trend window.
EmpiricalProbe classify_fraction(const SystemFamily& family, double theta, const EmpiricalOptions& opts = {});

/// Boundary between persistent and extinct grid fractions, refined by
/// bisection. Returns 1 when everything persists and 0 when nothing does.
EmpiricalThreshold empirical_threshold(const SystemFamily& family, std::span<const double> grid,
                                       const EmpiricalOptions& opts = {});

struct LemmaCheck {
  bool holds = false;
  double margin = 0;      // strict margin; > 1e-9 counts as strict
  bool boundary = false;  // non-strict form holds, strict form does not
  std::size_t checked = 0;
};

struct AppendixReport {
  LemmaCheck nonnegativity;        // P(x) >= 0; margin: smallest entry of P(x) over nonzero samples
  LemmaCheck order;                // y << x  =>  P(y) << P(x)
  LemmaCheck jacobian_positive;    // DP(0) >> 0 and DP(x) >= 0
  LemmaCheck jacobian_decreasing;  // 0 << x << y  =>  DP(x) >= DP(y), some entry larger

  bool all() const {
    return nonnegativity.holds && order.holds && jacobian_positive.holds && jacobian_decreasing.holds;
  }
};

/// Checks the four comparison lemmas on the samples and on every ordered pair
/// among them.
AppendixReport verify_appendix_lemmas(const SeasonalSystem& system, std::span<const VectorXd> samples,
                                      double step = 0);

}  // namespace seasonal
