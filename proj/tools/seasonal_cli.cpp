// Batch front end: seasonal_cli <command> --scenario file.json [--out dir] ...
//
// Exit codes: 0 success, 1 some rows or certificates could not be evaluated,
// 2 bad usage or an unreadable scenario.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "seasonal/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Seasonal threshold toolkit"};
  std::string command;
  std::string scenario_path;
  std::string out_dir = ".";
  double theta = -1;
  std::size_t grid = 0;
  double tol = 0;
  std::uint64_t seed = 1;
  int periods = 10;
  bool with_simulation = false;

  app.add_option("command", command, "floquet | threshold | check | simulate | poincare | split | verify")
      ->required()
      ->check(CLI::IsMember({"floquet", "threshold", "check", "simulate", "poincare", "split", "verify"}));
  app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--theta", theta, "unfavorable season fraction")->check(CLI::Range(0.0, 1.0));
  app.add_option("--grid", grid, "number of uniform grid points")->check(CLI::Range(2, 1000000));
  app.add_option("--tol", tol, "bisection tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--periods", periods, "periods to integrate (simulate)")->check(CLI::Range(1, 1000000));
  app.add_flag("--with-simulation", with_simulation, "add simulated multipliers to the sweep");
  CLI11_PARSE(app, argc, argv);

  try {
    auto scenario = seasonal::load_scenario(scenario_path);
    if (theta >= 0) scenario.theta = theta;
    if (grid > 0) {
      scenario.grid_count = grid;
      scenario.grid_values.reset();
    }
    if (tol > 0) scenario.tolerances.bisect_tol = tol;

    seasonal::CommandOptions opts;
    opts.out_dir = out_dir;
    opts.with_simulation = with_simulation;
    opts.seed = seed;
    opts.periods = periods;
    const auto result = seasonal::run_command(command, scenario, opts);
    std::cout << result.summary;
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
    return result.exit_code;
  } catch (const seasonal::ParseError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const seasonal::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const seasonal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
