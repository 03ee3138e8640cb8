#pragma once

// Scenario files (JSON) and the batch commands run on them.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seasonal/floquet.hpp"
#include "seasonal/insect.hpp"
#include "seasonal/splitter.hpp"

namespace seasonal {

enum class ScenarioMode { Insect, Matrices };

struct Tolerances {
  double perron_tol = kDefaultPerronTol;
  double bisect_tol = 1e-10;
  double ode_step = 0;  // 0 means period / 2000
  double extinction_threshold = 1e-9;
  double divergence_bound = 1e9;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct SplitConfig {
  int k = 2;
  int resolution = 50;
  SplitMode mode = SplitMode::Max;
  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

struct InsectPair {
  insect::InsectParams unfavorable;
  insect::InsectParams favorable;
  friend bool operator==(const InsectPair&, const InsectPair&) = default;
};

struct MatrixPair {
  MatrixXd m1;
  MatrixXd m2;
  friend bool operator==(const MatrixPair& a, const MatrixPair& b) {
    return a.m1.rows() == b.m1.rows() && a.m1.cols() == b.m1.cols() && a.m2.rows() == b.m2.rows() &&
           a.m2.cols() == b.m2.cols() && a.m1 == b.m1 && a.m2 == b.m2;
  }
};

struct Scenario {
  ScenarioMode mode = ScenarioMode::Insect;
  double period = 1.0;
  std::optional<InsectPair> insect;
  std::optional<MatrixPair> matrices;
  std::optional<double> theta;
  std::optional<std::size_t> grid_count;         // theta_grid given as a count
  std::optional<std::vector<double>> grid_values;  // theta_grid given as a list
  Tolerances tolerances;
  std::optional<SplitConfig> split;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  /// Explicit list, else `grid_count` (default 101) uniform points.
  std::vector<double> grid() const;
  TwoSeasonLinearization linearization() const;
  /// Nonlinear insect system or the linear system of the two matrices.
  SeasonalSystem system(double theta) const;
  FloquetOptions floquet_options() const;
};

/// Throws ParseError naming the offending key.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
/// Every field written out, defaults included.
std::string dump_scenario(const Scenario& scenario);

/// Number formatting shared by all outputs: 17 significant digits.
std::string format_number(double value);

struct SweepOutput {
  std::string csv;
  std::size_t row_errors = 0;
};

/// Columns theta,rho,rho_prime,rho_second,classification,lambda_simulated,error.
SweepOutput run_sweep(const Scenario& scenario, bool with_simulation = false);

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  bool with_simulation = false;
  std::uint64_t seed = 1;
  int periods = 10;  // simulate: number of periods
};

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::string summary;  // human-readable, printed by the CLI
  int exit_code = 0;
};

/// One of floquet, threshold, check, simulate, poincare, split, verify.
/// Throws UsageError naming the missing key when a command lacks its input.
CommandResult run_command(const std::string& name, const Scenario& scenario, const CommandOptions& opts = {});

}  // namespace seasonal
