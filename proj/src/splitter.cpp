#include "seasonal/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace seasonal {

double SplitSchedule::theta() const { return std::accumulate(sigma.begin(), sigma.end(), 0.0); }

bool SplitSchedule::belongs_to(double theta) const {
  if (sigma.empty() || sigma.size() != sigma_prime.size()) return false;
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!std::all_of(sigma.begin(), sigma.end(), in_unit)) return false;
  if (!std::all_of(sigma_prime.begin(), sigma_prime.end(), in_unit)) return false;
  const double fav = std::accumulate(sigma_prime.begin(), sigma_prime.end(), 0.0);
  return std::abs(this->theta() - theta) <= 1e-12 && std::abs(fav - (1.0 - theta)) <= 1e-12;
}

SplitSchedule SplitSchedule::single(double theta) { return {{theta}, {1.0 - theta}}; }

MatrixXd split_monodromy(const MatrixXd& m1, const MatrixXd& m2, const SplitSchedule& schedule) {
  require_square(m1, "split_monodromy");
  require_square(m2, "split_monodromy");
  if (m1.rows() != m2.rows()) throw InvalidInput("split_monodromy: matrices differ in size");
  if (!schedule.belongs_to(schedule.theta())) throw InvalidInput("split_monodromy: invalid schedule");
  MatrixXd product = MatrixXd::Identity(m1.rows(), m1.cols());
  for (std::size_t k = 0; k < schedule.blocks(); ++k) {
    product = mat_exp(schedule.sigma_prime[k] * m2) * mat_exp(schedule.sigma[k] * m1) * product;
  }
  return product;
}

std::string to_string(SplitMode mode) { return mode == SplitMode::Max ? "max" : "min"; }

namespace {

// All compositions of `total` into `parts` nonnegative integers.
std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(parts, 0);
  auto fill = [&](auto&& self, int index, int left) -> void {
    if (index == parts - 1) {
      current[index] = left;
      out.push_back(current);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      current[index] = v;
      self(self, index + 1, left - v);
    }
  };
  fill(fill, 0, total);
  return out;
}

double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

bool better(double candidate, double incumbent, SplitMode mode) {
  return mode == SplitMode::Max ? candidate > incumbent : candidate < incumbent;
}

SplitSchedule from_compositions(const std::vector<int>& u, const std::vector<int>& f, int resolution, double theta) {
  SplitSchedule s;
  for (int v : u) s.sigma.push_back(theta * v / resolution);
  for (int v : f) s.sigma_prime.push_back((1.0 - theta) * v / resolution);
  return s;
}

SplitOptimum grid_search(const MatrixXd& m1, const MatrixXd& m2, double theta, int k, SplitMode mode,
                         int resolution) {
  // Exponentials of every grid block length, computed once.
  std::vector<MatrixXd> unfav(resolution + 1), fav(resolution + 1);
  for (int j = 0; j <= resolution; ++j) {
    unfav[j] = mat_exp((theta * j / resolution) * m1);
    fav[j] = mat_exp(((1.0 - theta) * j / resolution) * m2);
  }
  const auto u_grid = compositions(resolution, k);
  const auto f_grid = compositions(resolution, k);

  SplitOptimum best;
  best.resolution = resolution;
  best.rho = mode == SplitMode::Max ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
  const Eigen::Index n = m1.rows();
  std::size_t best_u = 0, best_f = 0;
  for (std::size_t iu = 0; iu < u_grid.size(); ++iu) {
    for (std::size_t jf = 0; jf < f_grid.size(); ++jf) {
      MatrixXd product = MatrixXd::Identity(n, n);
      for (int b = 0; b < k; ++b) product = fav[f_grid[jf][b]] * (unfav[u_grid[iu][b]] * product);
      const double value = spectral_radius(product);
      ++best.evaluated;
      if (better(value, best.rho, mode)) {
        best.rho = value;
        best_u = iu;
        best_f = jf;
      }
    }
  }
  best.schedule = from_compositions(u_grid[best_u], f_grid[best_f], resolution, theta);
  return best;
}

double schedule_rho(const MatrixXd& m1, const MatrixXd& m2, const SplitSchedule& s) {
  return spectral_radius(split_monodromy(m1, m2, s));
}

SplitOptimum coordinate_descent(const MatrixXd& m1, const MatrixXd& m2, double theta, int k, SplitMode mode,
                                int resolution, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SplitOptimum best;
  best.heuristic = true;
  best.resolution = resolution;
  best.rho = mode == SplitMode::Max ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
  constexpr int kRestarts = 8;
  for (int restart = 0; restart < kRestarts; ++restart) {
    SplitSchedule s = restart == 0 ? SplitSchedule{std::vector<double>(k, theta / k),
                                                   std::vector<double>(k, (1.0 - theta) / k)}
                                   : random_schedule(k, theta, rng);
    double value = schedule_rho(m1, m2, s);
    ++best.evaluated;
    for (double quantum = 0.25; quantum >= 1.0 / resolution; quantum *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        // Move mass between two blocks of the same kind.
        for (int kind = 0; kind < 2; ++kind) {
          auto& blocks = kind == 0 ? s.sigma : s.sigma_prime;
          const double budget = kind == 0 ? theta : 1.0 - theta;
          const double delta = quantum * budget;
          if (delta <= 0) continue;
          for (int from = 0; from < k; ++from) {
            for (int to = 0; to < k; ++to) {
              if (from == to || blocks[from] < delta) continue;
              blocks[from] -= delta;
              blocks[to] += delta;
              const double trial = schedule_rho(m1, m2, s);
              ++best.evaluated;
              if (better(trial, value, mode) && std::abs(trial - value) > 1e-15 * std::abs(value)) {
                value = trial;
                improved = true;
              } else {
                blocks[from] += delta;
                blocks[to] -= delta;
              }
            }
          }
        }
      }
    }
    if (better(value, best.rho, mode)) {
      best.rho = value;
      best.schedule = s;
    }
  }
  best.note = "heuristic coordinate descent with random restarts";
  return best;
}

}  // namespace

SplitOptimum optimize_split(const MatrixXd& m1, const MatrixXd& m2, double theta, int k, SplitMode mode,
                            int resolution, std::size_t max_evaluations, std::uint64_t seed) {
  require_square(m1, "optimize_split");
  require_square(m2, "optimize_split");
  if (m1.rows() != m2.rows()) throw InvalidInput("optimize_split: matrices differ in size");
  if (!is_metzler(m1) || !is_metzler(m2)) throw StructureError("optimize_split: matrices must be Metzler");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("optimize_split: theta must lie in [0, 1]");
  if (k < 1) throw InvalidInput("optimize_split: need at least one block");
  if (resolution < 1) throw InvalidInput("optimize_split: resolution must be positive");

  if (k == 1) {
    const auto s = SplitSchedule::single(theta);
    return {s, schedule_rho(m1, m2, s), resolution, 1, false, "single feasible schedule"};
  }
  if (k > 4) return coordinate_descent(m1, m2, theta, k, mode, resolution, seed);

  int used = resolution;
  auto grid_size = [k](int r) { return binomial(r + k - 1, k - 1) * binomial(r + k - 1, k - 1); };
  while (used > 1 && grid_size(used) > static_cast<double>(max_evaluations)) --used;
  auto best = grid_search(m1, m2, theta, k, mode, used);
  std::ostringstream note;
  note << "grid " << to_string(mode) << " over " << best.evaluated << " schedules; "
       << (mode == SplitMode::Max ? "lower" : "upper") << " estimate of the true " << to_string(mode);
  if (used != resolution) note << "; resolution lowered from " << resolution << " to " << used;
  best.note = note.str();
  return best;
}

SplitSchedule random_schedule(int k, double theta, std::mt19937_64& rng) {
  if (k < 1) throw InvalidInput("random_schedule: need at least one block");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("random_schedule: theta must lie in [0, 1]");
  std::exponential_distribution<double> draw(1.0);
  auto split = [&](double budget) {
    std::vector<double> w(k);
    for (auto& v : w) v = draw(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double used = 0;
    for (int i = 0; i + 1 < k; ++i) {
      w[i] = budget * w[i] / total;
      used += w[i];
    }
    w[k - 1] = std::max(0.0, budget - used);
    return w;
  };
  SplitSchedule s;
  s.sigma = split(theta);
  s.sigma_prime = split(1.0 - theta);
  return s;
}

GelfandReport gelfand_bound_probe(const MatrixXd& m1, const MatrixXd& m2, std::span<const SplitSchedule> schedules) {
  if (!is_metzler(m1) || !is_metzler(m2)) throw StructureError("gelfand_bound_probe: matrices must be Metzler");
  const double mu1 = spectral_abscissa(m1);
  const double mu2 = spectral_abscissa(m2);
  GelfandReport report;
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < schedules.size(); ++i) {
    const auto& s = schedules[i];
    const double theta = s.theta();
    GelfandRow row{theta, spectral_radius(split_monodromy(m1, m2, s)), std::exp(theta * mu1 + (1.0 - theta) * mu2)};
    report.worst_excess = std::max(report.worst_excess, row.rho - row.bound);
    report.max_relative_gap = std::max(report.max_relative_gap, std::abs(row.rho - row.bound) / row.bound);
    if (row.rho > row.bound + 1e-9) report.violations.push_back(i);
    report.rows.push_back(row);
  }
  return report;
}

double condition_a_threshold(double mu_unfavorable, double mu_favorable) {
  if (!(mu_favorable > 0.0 && mu_unfavorable < 0.0)) {
    throw InvalidInput("condition_a_threshold: needs mu_favorable > 0 > mu_unfavorable");
  }
  return mu_favorable / (mu_favorable - mu_unfavorable);
}

}  // namespace seasonal
