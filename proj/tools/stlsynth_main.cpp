/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

using namespace stlsynth;

int main(int argc, char **argv) {
  CLI::App app{"Control synthesis for signal temporal logic specifications"};
  app.require_subcommand(1);

  // solve
  std::string solve_scenario, solve_out = ".";
  std::uint64_t seed = 0;
  int restarts = 0;
  double k = 0, tau = 0;
  bool svg = false;
  std::string until_sem;
  CLI::App *solve = app.add_subcommand("solve", "solve one scenario");
  solve->add_option("scenario", solve_scenario, "scenario JSON file")->required();
  auto *seed_opt = solve->add_option("--seed", seed, "base RNG seed");
  auto *restarts_opt = solve->add_option("--restarts", restarts, "seeded restarts");
  auto *k_opt = solve->add_option("--k", k, "smoothing sharpness");
  auto *tau_opt = solve->add_option("--tau", tau, "penalty weight");
  solve->add_option("--out", solve_out, "output directory");
  solve->add_flag("--svg", svg, "also write workspace.svg");
  solve->add_option("--until-semantics", until_sem, "paper|standard")
      ->check(CLI::IsMember({"paper", "standard"}));

  // sweep
  std::string sweep_scenario, horizons_text = "50:140:5", sweep_out = "results.csv";
  int trials = 5;
  CLI::App *sweep = app.add_subcommand("sweep", "horizon sweep benchmark");
  sweep->add_option("scenario", sweep_scenario, "scenario JSON file")->required();
  sweep->add_option("--horizons", horizons_text, "a:b:s range or comma list");
  sweep->add_option("--trials", trials, "trials per horizon");
  sweep->add_option("--out", sweep_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      Scenario scenario = load_scenario(solve_scenario);
      RunOptions opts;
      if (seed_opt->count()) opts.seed = seed;
      if (restarts_opt->count()) opts.restarts = restarts;
      if (k_opt->count()) opts.k = k;
      if (tau_opt->count()) opts.tau = tau;
      if (!until_sem.empty())
        opts.until_sem = until_sem == "paper" ? UntilSemantics::paper
                                              : UntilSemantics::standard;
      opts.out_dir = solve_out;
      opts.svg = svg;
      SolveOutputs out = run_solve(scenario, opts);
      std::printf("status:            %s\n", to_string(out.report.status));
      std::printf("exact robustness:  %.6f\n", out.report.exact_robustness);
      std::printf("smoothed reversed: %.6f\n", out.report.smoothed_reversed);
      std::printf("s_xi:              %.6f\n", out.report.s_xi);
      std::printf("iterations:        %d\n", out.report.iterations);
      std::printf("wallclock:         %.3f s\n", out.report.wallclock_seconds);
      std::printf("wrote %s\n", out.result_json_path.c_str());
      std::printf("wrote %s\n", out.trajectory_csv_path.c_str());
      if (!out.svg_path.empty()) std::printf("wrote %s\n", out.svg_path.c_str());
    } else if (sweep->parsed()) {
      Scenario scenario = load_scenario(sweep_scenario);
      const std::vector<int> horizons = parse_horizons(horizons_text);
      run_sweep(scenario, horizons, trials, sweep_out);
      std::printf("wrote %s\n", sweep_out.c_str());
    }
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
