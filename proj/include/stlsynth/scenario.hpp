/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include "stlsynth/ccp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stlsynth {

/// Everything needed to reproduce one synthesis run. Loaded from a JSON
/// file with an explicit schema version (see load_scenario).
struct Scenario {
  LinearSystem system;
  Eigen::VectorXd x0;
  std::string formula_text; // DSL, empty when the builtin is used
  bool two_target = false;  // builtin benchmark formula
  int T = 25;
  int T_d = 5;
  RegionTable regions;
  SmoothingConfig smoothing;
  CcpConfig ccp;
  UntilSemantics until_sem = UntilSemantics::paper;

  /// NNF formula for this scenario (builtin or parsed DSL).
  Formula build_formula() const;

  /// Throws when dimensions are inconsistent, the horizon exceeds T, or a
  /// region pokes outside the position bounds.
  void validate() const;
};

/// Reach-one-of-two-targets benchmark: dwell in B1 or B2 for T_d steps
/// within [0, T - T_d], avoid O over [0, T], reach G within [0, T].
/// Region sugar is expanded, so the result is already in NNF.
Formula build_two_target(int T, int T_d, const RegionTable &regions, int dim = 4);

/// Double integrator, x0 = (2, 2, 0, 0), and a workspace whose regions are
/// all reachable under the input bounds: obstacle [4,6]^2, targets
/// B1 = [1,3]x[7,9], B2 = [7,9]^2, goal G = [7,9]x[1,3].
Scenario default_two_target_scenario();

/*
 * Scenario JSON schema (version 1):
 * {
 *   "version": 1,
 *   "system": "double_integrator" | {"A": [[..]], "B": [[..]],
 *              "x_lo": [..], "x_hi": [..], "u_lo": [..], "u_hi": [..]},
 *   "x0": [..],
 *   "formula": "DSL string" | {"builtin": "two_target"},
 *   "T": int, "T_d": int,
 *   "regions": {"B1": [x_lo, x_hi, y_lo, y_hi], ..},
 *   "smoothing": {"k": double},
 *   "ccp": {"penalty_weight", "quad_weight", "max_outer_iter", "cost_tol",
 *           "restarts", "seed", "init" ("random"|"zero"), "qp_tol",
 *           "qp_max_iter", "Q": [[..]], "R": [[..]]},             (all optional)
 *   "until_semantics": "paper" | "standard"                       (optional)
 * }
 */
Scenario load_scenario(const std::string &path);
Scenario scenario_from_json_text(const std::string &text);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<double> k;
  std::optional<double> tau;
  std::optional<UntilSemantics> until_sem;
  std::string out_dir = ".";
  bool svg = true;
};

struct SolveOutputs {
  CcpReport report;
  std::string result_json_path;
  std::string trajectory_csv_path;
  std::string svg_path; // empty when not requested
};

/// Solve the scenario and write result.json, trajectory.csv, and (when
/// requested) workspace.svg under out_dir. The result JSON is
/// deterministic for a fixed scenario and seed except for the
/// "wallclock_seconds" field.
SolveOutputs run_solve(const Scenario &scenario, const RunOptions &opts = {});

/// Result JSON text for a finished run (same bytes run_solve writes).
std::string report_to_json(const CcpReport &report, const Scenario &scenario);

struct SweepRow {
  int T = 0;
  std::uint64_t seed = 0;
  double wallclock_seconds = 0;
  double exact_robustness = 0;
  std::string status;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// One single-start solve per (horizon, trial) cell, seeds rng_seed + trial;
/// cells run in parallel and failures become rows with status "error".
/// Appends a CSV at out_csv (header: T,seed,wallclock_seconds,
/// exact_robustness,status) and prints per-horizon means.
SweepResult run_sweep(const Scenario &scenario, const std::vector<int> &horizons,
                      int trials, const std::string &out_csv);

/// "a:b:s" (inclusive, step s) or comma list "50,55,60".
std::vector<int> parse_horizons(const std::string &text);

void write_trajectory_csv(const Trajectory &traj, const std::string &path);
Trajectory read_trajectory_csv(const std::string &path, int n, int m);
void write_workspace_svg(const Scenario &scenario, const Trajectory &traj,
                         const std::string &path);

} // namespace stlsynth
