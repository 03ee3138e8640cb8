#pragma once

// Spectral radius over split-season schedules: the unfavorable budget theta
// and the favorable budget 1 - theta are each cut into K blocks that
// alternate within one period. Matrices here already include the period
// (M = T * DF(0)).

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seasonal/linalg.hpp"

namespace seasonal {

struct SplitSchedule {
  std::vector<double> sigma;        // unfavorable block lengths
  std::vector<double> sigma_prime;  // favorable block lengths

  std::size_t blocks() const { return sigma.size(); }
  double theta() const;
  /// Entries in [0,1], equal block counts, sums theta and 1 - theta within 1e-12.
  bool belongs_to(double theta) const;
  /// The K = 1 schedule ({theta}, {1 - theta}).
  static SplitSchedule single(double theta);
};

/// e^{s'_K m2} e^{s_K m1} ... e^{s'_1 m2} e^{s_1 m1}; the rightmost factor is
/// the first unfavorable block.
MatrixXd split_monodromy(const MatrixXd& m1, const MatrixXd& m2, const SplitSchedule& schedule);

enum class SplitMode { Max, Min };
std::string to_string(SplitMode mode);

struct SplitOptimum {
  SplitSchedule schedule;
  double rho = 0;
  int resolution = 0;          // simplex subdivisions actually used
  std::size_t evaluated = 0;
  bool heuristic = false;      // coordinate descent rather than the full grid
  std::string note;
};

/// Exhaustive search over the product of two simplex grids with `resolution`
/// subdivisions for k <= 4. When the grid would exceed `max_evaluations`
/// the resolution is lowered to the largest that fits. For k > 4, random
/// restarts of coordinate descent. Grid optima bound the true max from below
/// and the true min from above.
SplitOptimum optimize_split(const MatrixXd& m1, const MatrixXd& m2, double theta, int k, SplitMode mode,
                            int resolution = 50, std::size_t max_evaluations = 2'000'000,
                            std::uint64_t seed = 1);

/// Uniformly random member of phi_K(theta).
SplitSchedule random_schedule(int k, double theta, std::mt19937_64& rng);

struct GelfandRow {
  double theta = 0;
  double rho = 0;
  double bound = 0;  // e^{theta mu1 + (1 - theta) mu2}
};

struct GelfandReport {
  std::vector<GelfandRow> rows;
  std::vector<std::size_t> violations;  // rows with rho > bound + 1e-9
  double worst_excess = 0;              // max(rho - bound)
  double max_relative_gap = 0;          // max |rho - bound| / bound
};

GelfandReport gelfand_bound_probe(const MatrixXd& m1, const MatrixXd& m2, std::span<const SplitSchedule> schedules);

/// muF / (muF - muU); requires muF > 0 > muU.
double condition_a_threshold(double mu_unfavorable, double mu_favorable);

}  // namespace seasonal
