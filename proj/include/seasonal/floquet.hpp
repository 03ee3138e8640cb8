#pragma once

// Monodromy of two-season linearizations, the spectral radius rho(theta) and
// its analytic first and second derivatives in the season fraction, the
// extinction threshold, and two diagnostics (log-convexity, long/short
// period asymptotics).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seasonal/linalg.hpp"
#include "seasonal/seasonal_system.hpp"

namespace seasonal {

/// Linearizations at zero of the unfavorable (season 1, first in the period)
/// and favorable (season 2) regimes, with the period T. Both must be
/// irreducible Metzler matrices of equal size.
class TwoSeasonLinearization {
 public:
  TwoSeasonLinearization(MatrixXd unfavorable, MatrixXd favorable, double period);

  const MatrixXd& m1() const { return m1_; }
  const MatrixXd& m2() const { return m2_; }
  /// m1 - m2.
  const MatrixXd& s() const { return s_; }
  double period() const { return period_; }
  Eigen::Index dimension() const { return m1_.rows(); }

  TwoSeasonLinearization with_period(double period) const { return {m1_, m2_, period}; }

 private:
  MatrixXd m1_;
  MatrixXd m2_;
  MatrixXd s_;
  double period_;
};

struct FloquetOptions {
  double perron_tol = kDefaultPerronTol;
  int perron_max_iter = kDefaultPerronMaxIter;
};

/// e^{(1-theta) T m2} e^{theta T m1}.
MatrixXd monodromy(const TwoSeasonLinearization& lin, double theta);

/// Ordered product of the per-season exponentials of DF^k(0); the rightmost
/// factor is the first season.
MatrixXd monodromy_general(const SeasonalSystem& system);

struct RhoEval {
  double rho = 0;
  PerronPair<double> pair;
  MatrixXd monodromy;
};

RhoEval rho(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts = {});

/// d rho / d theta = T rho <S V, V*>.
double rho_prime(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts = {});

/// d^2 rho / d theta^2 from the Perron pair and one constrained adjoint solve.
double rho_second(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts = {});

struct RhoDerivatives {
  double theta = 0;
  double rho = 0;
  double rho_prime = 0;
  double rho_second = 0;
  PerronPair<double> pair;
};

/// All three quantities from a single monodromy and Perron solve.
RhoDerivatives rho_derivatives(const TwoSeasonLinearization& lin, double theta, const FloquetOptions& opts = {});

enum class ResolventSide { Right, Adjoint };

/// Inverse of M - rho I restricted to the hyperplanes orthogonal to the
/// Perron vectors.
///   Right:   (M   - rho I) x = b,  <v, x> = 0,  requires <b, v_star> = 0.
///   Adjoint: (M^T - rho I) x = b,  <v, x> = 0,  requires <b, v> = 0.
/// Solved as one bordered (n+1)x(n+1) system.
VectorXd constrained_resolvent(const MatrixXd& m, double rho, const VectorXd& v, const VectorXd& v_star,
                               const VectorXd& b, ResolventSide side);

struct RhoProfile {
  std::vector<double> thetas;
  std::vector<double> rho;
  std::vector<double> rho_prime;
  std::vector<double> rho_second;
  std::vector<PerronPair<double>> perron_pairs;
};

RhoProfile rho_profile(const TwoSeasonLinearization& lin, std::span<const double> thetas,
                       const FloquetOptions& opts = {});

/// `points` equally spaced fractions from 0 to 1 inclusive.
std::vector<double> uniform_grid(std::size_t points);

struct MonotoneCertificate {
  bool holds = false;
  std::optional<std::size_t> violating_cell;  // index i of the cell [theta_i, theta_{i+1}]
  std::string detail;
};

/// Strict decrease of rho over the grid and rho' < 0 at every grid point.
MonotoneCertificate monotone_certificate(const TwoSeasonLinearization& lin, std::span<const double> grid,
                                         const FloquetOptions& opts = {});

enum class Regime { InteriorRoot, AlwaysExtinct, AlwaysPersistent };
std::string to_string(Regime regime);

struct ThresholdOptions {
  double tol = 1e-10;
  int max_iter = 200;
  std::size_t grid_points = 101;
  bool override_certificate = false;
  FloquetOptions floquet;
};

struct ThresholdReport {
  double theta_star = 0;
  Regime regime = Regime::InteriorRoot;
  bool monotone_certificate = false;
  double bracket_lo = 0;  // rho(bracket_lo) > 1
  double bracket_hi = 1;  // rho(bracket_hi) < 1
  double rho_at_threshold = 0;
  double rho_at_zero = 0;
  double rho_at_one = 0;
  int iterations = 0;
  std::string certificate_detail;
};

/// theta* = 0 when rho(0) <= 1, theta* = 1 when rho(1) > 1, otherwise the
/// bisection root of rho - 1. Throws CertificateError when a root is needed
/// but rho is not certified decreasing and no override is given.
ThresholdReport find_threshold(const TwoSeasonLinearization& lin, const ThresholdOptions& opts = {});

struct LogConvexityReport {
  std::vector<double> thetas;
  std::vector<double> log_rho;
  std::vector<double> second_differences;  // aligned with thetas[1..n-2]
  double worst_second_difference = 0;
  bool log_convex = false;
  /// (mu2 - <m1 V2, V2*>) (<m2 V1, V1*> - mu1) from the single-season pairs.
  double endpoint_condition = 0;
  bool endpoint_condition_positive = false;
};

LogConvexityReport log_convexity_probe(const TwoSeasonLinearization& lin, std::span<const double> grid,
                                       const FloquetOptions& opts = {});

struct TimescaleRow {
  double period = 0;
  double log_rho_over_period = 0;  // (1/T) log rho(theta)
  double interpolation = 0;        // theta mu1 + (1 - theta) mu2
  double correction = 0;           // log rho - T * interpolation
};

struct TimescaleReport {
  double theta = 0;
  std::vector<TimescaleRow> rows;
  /// log(V*(0)^T V(1) . V*(1)^T V(0)), the large-T limit of the correction.
  double limit_correction = 0;
  std::vector<double> successive_differences;
  bool differences_shrinking = false;
  double final_error = 0;  // |last correction - limit|
  double small_period = 0;
  double rho_small_period = 0;
};

/// Evaluates rho on rescaled monodromies e^{-T mu} e^{T m} so large periods do
/// not overflow. Differences at or below `floor` count as converged when
/// judging monotone shrinking.
TimescaleReport timescale_asymptotics(const TwoSeasonLinearization& lin, double theta,
                                      std::span<const double> periods, double small_period = 1e-6,
                                      double floor = 1e-12, const FloquetOptions& opts = {});

}  // namespace seasonal
