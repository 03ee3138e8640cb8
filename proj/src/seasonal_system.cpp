#include "seasonal/seasonal_system.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace seasonal {

AutonomousPiece make_linear_piece(const MatrixXd& a) {
  require_square(a, "make_linear_piece");
  return {[a](const VectorXd& x) -> VectorXd { return a * x; },
          [a](const VectorXd&) -> MatrixXd { return a; }, a};
}

bool piece_is_consistent(const AutonomousPiece& piece, std::span<const VectorXd> samples) {
  const Eigen::Index n = piece.linearization_at_zero.rows();
  if (piece.vector_field(VectorXd::Zero(n)).lpNorm<Eigen::Infinity>() > 1e-12) return false;
  const double h = 1e-6;
  for (const auto& x : samples) {
    const MatrixXd jac = piece.jacobian(x);
    for (Eigen::Index j = 0; j < n; ++j) {
      VectorXd up = x;
      VectorXd down = x;
      up(j) += h;
      down(j) -= h;
      const VectorXd column = (piece.vector_field(up) - piece.vector_field(down)) / (2 * h);
      const double scale = std::max(1.0, jac.col(j).lpNorm<Eigen::Infinity>());
      if ((column - jac.col(j)).lpNorm<Eigen::Infinity>() > 1e-5 * scale) return false;
    }
  }
  return true;
}

SeasonalSchedule::SeasonalSchedule(double period, std::vector<double> breakpoints)
    : period_(period), breakpoints_(std::move(breakpoints)) {
  if (!(period_ > 0) || !std::isfinite(period_)) throw InvalidInput("schedule: period must be positive");
  if (breakpoints_.size() < 2) throw InvalidInput("schedule: need at least two breakpoints");
  if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0) {
    throw InvalidInput("schedule: breakpoints must start at 0 and end at 1");
  }
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end())) {
    throw InvalidInput("schedule: breakpoints must be nondecreasing");
  }
}

std::size_t SeasonalSchedule::season_index(double t) const {
  if (!(t >= 0)) throw InvalidInput("season_index: time must be nonnegative");
  const double scaled = t / period_;
  double frac = scaled - std::floor(scaled);
  if (frac >= 1.0) frac = 0.0;
  // Last breakpoint <= frac; ties resolve to the later window so empty
  // windows are skipped and boundaries are right-continuous.
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), frac);
  auto k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(k, season_count() - 1);
}

SeasonalSystem::SeasonalSystem(SeasonalSchedule schedule, std::vector<AutonomousPiece> pieces)
    : schedule_(std::move(schedule)), pieces_(std::move(pieces)) {
  if (pieces_.size() != schedule_.season_count()) {
    throw InvalidInput("seasonal system: piece count must equal the number of seasons");
  }
  dimension_ = pieces_.front().linearization_at_zero.rows();
  for (const auto& p : pieces_) {
    require_square(p.linearization_at_zero, "seasonal system");
    if (p.linearization_at_zero.rows() != dimension_) {
      throw InvalidInput("seasonal system: pieces disagree on dimension");
    }
    if (!p.vector_field || !p.jacobian) throw InvalidInput("seasonal system: piece lacks a field");
  }
}

bool strictly_below(const VectorXd& x, const VectorXd& y) { return (x.array() < y.array()).all(); }

ValidationReport validate_structure(const SeasonalSystem& system, std::span<const VectorXd> sample_states) {
  const Eigen::Index n = system.dimension();
  for (const auto& x : sample_states) {
    if (x.size() != n) throw InvalidInput("validate_structure: sample dimension mismatch");
  }
  constexpr double slack = 1e-12;
  ValidationReport report;
  report.metzler_at_samples = true;
  report.positive = true;
  report.concave_at_samples = true;
  report.irreducible_at_zero = true;

  for (const auto& piece : system.pieces()) {
    report.irreducible_at_zero = report.irreducible_at_zero && is_irreducible(piece.linearization_at_zero);
    for (const auto& x : sample_states) {
      if (!is_metzler(piece.jacobian(x))) report.metzler_at_samples = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        VectorXd face = x.cwiseMax(0.0);
        face(i) = 0.0;
        if (piece.vector_field(face)(i) < -slack) report.positive = false;
      }
    }
    for (const auto& x : sample_states) {
      for (const auto& y : sample_states) {
        if (!strictly_below(x, y)) continue;
        ++report.ordered_pairs_checked;
        if (((piece.jacobian(x) - piece.jacobian(y)).array() < -slack).any()) {
          report.concave_at_samples = false;
        }
      }
    }
  }
  return report;
}

std::vector<VectorXd> default_samples(Eigen::Index dimension, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::uniform_real_distribution<double> bump(0.1, 2.0);
  std::vector<VectorXd> out;
  out.push_back(VectorXd::Zero(dimension));
  for (int s = 0; s < 50; ++s) {
    VectorXd x(dimension);
    for (Eigen::Index i = 0; i < dimension; ++i) x(i) = coord(rng);
    out.push_back(x);
    VectorXd partner = x;
    for (Eigen::Index i = 0; i < dimension; ++i) partner(i) += bump(rng);
    out.push_back(partner);
    for (Eigen::Index i = 0; i < dimension; ++i) {
      VectorXd face = x;
      face(i) = 0.0;
      out.push_back(face);
    }
  }
  return out;
}

}  // namespace seasonal
