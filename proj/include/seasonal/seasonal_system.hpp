#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seasonal/linalg.hpp"

namespace seasonal {

/// One autonomous regime F^k of a piecewise-autonomous periodic system.
struct AutonomousPiece {
  std::function<VectorXd(const VectorXd&)> vector_field;
  std::function<MatrixXd(const VectorXd&)> jacobian;
  MatrixXd linearization_at_zero;  // DF^k(0)
};

/// dx/dt = A x.
AutonomousPiece make_linear_piece(const MatrixXd& a);

/// Checks F(0) = 0 and that the Jacobian matches a central finite difference
/// of the field (within 1e-5) at every sample.
bool piece_is_consistent(const AutonomousPiece& piece, std::span<const VectorXd> samples);

/// Period T and the nondecreasing season breakpoints 0 = b_0 <= ... <= b_K = 1
/// (fractions of the period).
class SeasonalSchedule {
 public:
  SeasonalSchedule(double period, std::vector<double> breakpoints);

  double period() const { return period_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  std::size_t season_count() const { return breakpoints_.size() - 1; }

  /// Zero-based season active at time t >= 0: the unique k whose half-open
  /// window [b_k, b_{k+1}) contains the fractional part of t/T. Empty windows
  /// are never returned.
  std::size_t season_index(double t) const;

  /// Length of season k as a fraction of the period.
  double fraction(std::size_t k) const { return breakpoints_[k + 1] - breakpoints_[k]; }

 private:
  double period_;
  std::vector<double> breakpoints_;
};

/// A T-periodic piecewise-autonomous system: one piece per season window.
class SeasonalSystem {
 public:
  SeasonalSystem(SeasonalSchedule schedule, std::vector<AutonomousPiece> pieces);

  const SeasonalSchedule& schedule() const { return schedule_; }
  const std::vector<AutonomousPiece>& pieces() const { return pieces_; }
  const AutonomousPiece& piece(std::size_t k) const { return pieces_[k]; }
  Eigen::Index dimension() const { return dimension_; }
  double period() const { return schedule_.period(); }

  /// Piece active at time t.
  const AutonomousPiece& piece_at(double t) const { return pieces_[schedule_.season_index(t)]; }

 private:
  SeasonalSchedule schedule_;
  std::vector<AutonomousPiece> pieces_;
  Eigen::Index dimension_;
};

struct ValidationReport {
  bool metzler_at_samples = false;   // cooperative
  bool positive = false;             // F_i(x) >= 0 whenever x_i = 0
  bool concave_at_samples = false;   // DF(x) >= DF(y) for sampled x << y
  bool irreducible_at_zero = false;  // every DF^k(0) irreducible
  std::size_t ordered_pairs_checked = 0;

  bool all() const { return metzler_at_samples && positive && concave_at_samples && irreducible_at_zero; }
};

/// Sample-based check of the structural hypotheses on every piece.
ValidationReport validate_structure(const SeasonalSystem& system, std::span<const VectorXd> sample_states);

/// 50 random nonnegative states in [0,10]^N, their coordinate-face
/// projections, and a strictly larger partner for each so ordered pairs exist.
std::vector<VectorXd> default_samples(Eigen::Index dimension, std::uint64_t seed = 1);

/// x << y componentwise.
bool strictly_below(const VectorXd& x, const VectorXd& y);

}  // namespace seasonal
