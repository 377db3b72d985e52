/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/scenario.hpp"

#include "stlsynth/log.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace stlsynth {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Builtin benchmark formula

Formula build_two_target(int T, int T_d, const RegionTable &regions, int dim) {
  // T_d == T degenerates the outer window to a single timestep, which is
  // still well defined, so only T_d > T is rejected.
  if (T < 1 || T_d < 0 || T_d > T)
    throw std::invalid_argument("two-target needs 0 <= T_d <= T and T >= 1");
  for (const char *name : {"B1", "B2", "O", "G"})
    if (!regions.count(name))
      throw std::invalid_argument(std::string("missing region '") + name + "'");

  Formula target = make_eventually(
      0, T - T_d,
      make_or({make_always(0, T_d, box_membership(regions.at("B1"), dim)),
               make_always(0, T_d, box_membership(regions.at("B2"), dim))}));
  Formula avoid = make_always(0, T, box_avoidance(regions.at("O"), dim));
  Formula goal = make_eventually(0, T, box_membership(regions.at("G"), dim));
  return make_and({std::move(target), std::move(avoid), std::move(goal)});
}

Scenario default_two_target_scenario() {
  Scenario s;
  s.system = double_integrator();
  s.x0 = (Eigen::VectorXd(4) << 2.0, 2.0, 0.0, 0.0).finished();
  s.two_target = true;
  s.T = 25;
  s.T_d = 5;
  s.regions = {{"B1", Box{1, 3, 7, 9}},
               {"B2", Box{7, 9, 7, 9}},
               {"O", Box{4, 6, 4, 6}},
               {"G", Box{7, 9, 1, 3}}};
  s.smoothing.k = 10.0;
  s.ccp.k = s.smoothing.k;
  return s;
}

Formula Scenario::build_formula() const {
  if (two_target) return build_two_target(T, T_d, regions, system.n());
  if (formula_text.empty())
    throw std::invalid_argument("scenario has neither a formula nor a builtin");
  return to_nnf(parse(formula_text, system.n(), regions));
}

void Scenario::validate() const {
  system.validate();
  if (x0.size() != system.n())
    throw std::invalid_argument("x0 has wrong dimension");
  const Formula f = build_formula();
  const int h = horizon(f);
  if (h > T)
    throw std::invalid_argument("formula horizon " + std::to_string(h) +
                                " exceeds trajectory length T = " + std::to_string(T));
  if (system.n() >= 2) {
    for (const auto &[name, box] : regions) {
      if (box.x_lo < system.x_lo[0] || box.x_hi > system.x_hi[0] ||
          box.y_lo < system.x_lo[1] || box.y_hi > system.x_hi[1])
        throw std::invalid_argument("region '" + name + "' outside state bounds");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON scenario loading

namespace {

Eigen::MatrixXd matrix_from_json(const json &j, const char *what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string("expected a matrix for ") + what);
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols)
      throw std::invalid_argument(std::string("ragged matrix for ") + what);
    for (size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json &j, const char *what) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("expected an array for ") + what);
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

} // namespace

Scenario scenario_from_json_text(const std::string &text) {
  json j = json::parse(text);
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw std::invalid_argument("scenario schema version must be 1");

  Scenario s;
  const json &sys = j.at("system");
  if (sys.is_string()) {
    if (sys.get<std::string>() != "double_integrator")
      throw std::invalid_argument("unknown builtin system '" +
                                  sys.get<std::string>() + "'");
    s.system = double_integrator();
  } else {
    s.system.A = matrix_from_json(sys.at("A"), "A");
    s.system.B = matrix_from_json(sys.at("B"), "B");
    s.system.x_lo = vector_from_json(sys.at("x_lo"), "x_lo");
    s.system.x_hi = vector_from_json(sys.at("x_hi"), "x_hi");
    s.system.u_lo = vector_from_json(sys.at("u_lo"), "u_lo");
    s.system.u_hi = vector_from_json(sys.at("u_hi"), "u_hi");
  }
  s.x0 = vector_from_json(j.at("x0"), "x0");
  s.T = j.at("T").get<int>();
  s.T_d = j.value("T_d", 5);

  if (j.contains("regions"))
    for (const auto &[name, arr] : j["regions"].items()) {
      if (!arr.is_array() || arr.size() != 4)
        throw std::invalid_argument("region '" + name + "' must be [x_lo,x_hi,y_lo,y_hi]");
      s.regions[name] = Box{arr[0].get<double>(), arr[1].get<double>(),
                            arr[2].get<double>(), arr[3].get<double>()};
    }

  const json &formula = j.at("formula");
  if (formula.is_string()) {
    s.formula_text = formula.get<std::string>();
  } else if (formula.is_object() && formula.contains("builtin")) {
    const std::string name = formula["builtin"].get<std::string>();
    if (name != "two_target")
      throw std::invalid_argument("unknown builtin formula '" + name + "'");
    s.two_target = true;
  } else {
    throw std::invalid_argument("formula must be a DSL string or {\"builtin\": ...}");
  }

  if (j.contains("smoothing")) s.smoothing.k = j["smoothing"].value("k", 10.0);
  s.ccp.k = s.smoothing.k;
  if (j.contains("ccp")) {
    const json &c = j["ccp"];
    s.ccp.penalty_weight = c.value("penalty_weight", s.ccp.penalty_weight);
    s.ccp.quad_weight = c.value("quad_weight", s.ccp.quad_weight);
    s.ccp.max_outer_iter = c.value("max_outer_iter", s.ccp.max_outer_iter);
    s.ccp.cost_tol = c.value("cost_tol", s.ccp.cost_tol);
    s.ccp.restarts = c.value("restarts", s.ccp.restarts);
    s.ccp.rng_seed = c.value("seed", s.ccp.rng_seed);
    s.ccp.qp_tol = c.value("qp_tol", s.ccp.qp_tol);
    s.ccp.qp_max_iter = c.value("qp_max_iter", s.ccp.qp_max_iter);
    if (c.contains("Q")) s.ccp.Q = matrix_from_json(c["Q"], "Q");
    if (c.contains("R")) s.ccp.R = matrix_from_json(c["R"], "R");
    const std::string init = c.value("init", "random");
    if (init == "random") s.ccp.init_mode = CcpConfig::Init::random_uniform;
    else if (init == "zero") s.ccp.init_mode = CcpConfig::Init::zero_input;
    else throw std::invalid_argument("ccp.init must be \"random\" or \"zero\"");
  }
  if (j.contains("until_semantics")) {
    const std::string sem = j["until_semantics"].get<std::string>();
    if (sem == "paper") s.until_sem = UntilSemantics::paper;
    else if (sem == "standard") s.until_sem = UntilSemantics::standard;
    else throw std::invalid_argument("until_semantics must be \"paper\" or \"standard\"");
  }
  return s;
}

Scenario load_scenario(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// Artifacts

static std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const Trajectory &traj, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "t";
  for (int i = 0; i < traj.n(); ++i) out << ",x" << i;
  for (int j = 0; j < traj.m(); ++j) out << ",u" << j;
  out << "\n";
  for (int t = 0; t <= traj.T(); ++t) {
    out << t;
    for (int i = 0; i < traj.n(); ++i) out << "," << fmt_full(traj.x(t, i));
    for (int j = 0; j < traj.m(); ++j) {
      out << ",";
      if (t < traj.T()) out << fmt_full(traj.u(t, j));
    }
    out << "\n";
  }
}

Trajectory read_trajectory_csv(const std::string &path, int n, int m) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line); // header
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> us;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    // allow the trailing empty input cells on the last row
    while (static_cast<int>(cells.size()) < 1 + n + m) cells.push_back("");
    std::vector<double> x(n), u;
    for (int i = 0; i < n; ++i) x[i] = std::stod(cells[1 + i]);
    bool has_u = !cells[1 + n].empty();
    if (has_u) {
      u.resize(m);
      for (int j = 0; j < m; ++j) u[j] = std::stod(cells[1 + n + j]);
      us.push_back(std::move(u));
    }
    xs.push_back(std::move(x));
  }
  Trajectory traj;
  traj.x.resize(xs.size(), n);
  for (size_t t = 0; t < xs.size(); ++t)
    for (int i = 0; i < n; ++i) traj.x(t, i) = xs[t][i];
  traj.u.resize(us.size(), m);
  for (size_t t = 0; t < us.size(); ++t)
    for (int j = 0; j < m; ++j) traj.u(t, j) = us[t][j];
  return traj;
}

void write_workspace_svg(const Scenario &scenario, const Trajectory &traj,
                         const std::string &path) {
  const double x_lo = scenario.system.x_lo[0], x_hi = scenario.system.x_hi[0];
  const double y_lo = scenario.system.x_lo[1], y_hi = scenario.system.x_hi[1];
  const double W = 520, Hpx = 520, margin = 10;
  auto sx = [&](double x) {
    return margin + (x - x_lo) / (x_hi - x_lo) * (W - 2 * margin);
  };
  auto sy = [&](double y) { // svg y axis points down
    return Hpx - margin - (y - y_lo) / (y_hi - y_lo) * (Hpx - 2 * margin);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << Hpx << "\" viewBox=\"0 0 " << W << " " << Hpx << "\">\n";
  out << "  <rect x=\"" << sx(x_lo) << "\" y=\"" << sy(y_hi) << "\" width=\""
      << sx(x_hi) - sx(x_lo) << "\" height=\"" << sy(y_lo) - sy(y_hi)
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto &[name, box] : scenario.regions) {
    const char *fill = name == "O" ? "#d66" : (name == "G" ? "#6c6" : "#69c");
    out << "  <rect x=\"" << sx(box.x_lo) << "\" y=\"" << sy(box.y_hi)
        << "\" width=\"" << sx(box.x_hi) - sx(box.x_lo) << "\" height=\""
        << sy(box.y_lo) - sy(box.y_hi) << "\" fill=\"" << fill
        << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << sx(box.x_lo) + 4 << "\" y=\"" << sy(box.y_hi) + 16
        << "\" font-size=\"14\">" << name << "</text>\n";
  }
  out << "  <polyline fill=\"none\" stroke=\"#224\" stroke-width=\"1.5\" points=\"";
  for (int t = 0; t <= traj.T(); ++t)
    out << sx(traj.x(t, 0)) << "," << sy(traj.x(t, 1)) << " ";
  out << "\"/>\n";
  out << "  <circle cx=\"" << sx(traj.x(0, 0)) << "\" cy=\"" << sy(traj.x(0, 1))
      << "\" r=\"4\" fill=\"#224\"/>\n";
  out << "</svg>\n";
}

std::string report_to_json(const CcpReport &report, const Scenario &scenario) {
  json j;
  j["status"] = to_string(report.status);
  j["seed"] = report.seed;
  j["iterations"] = report.iterations;
  j["exact_robustness"] = report.exact_robustness;
  j["smoothed_reversed"] = report.smoothed_reversed;
  j["s_xi"] = report.s_xi;
  j["slack_sum"] = report.slack_sum;
  j["margin_certified"] = report.margin_certified;
  j["objective_history"] = report.objective_history;
  j["violation_history"] = report.violation_history;
  json cfg;
  cfg["T"] = scenario.T;
  cfg["T_d"] = scenario.T_d;
  cfg["k"] = scenario.ccp.k;
  cfg["penalty_weight"] = scenario.ccp.penalty_weight;
  cfg["quad_weight"] = scenario.ccp.quad_weight;
  cfg["restarts"] = scenario.ccp.restarts;
  cfg["base_seed"] = scenario.ccp.rng_seed;
  cfg["until_semantics"] =
      scenario.until_sem == UntilSemantics::paper ? "paper" : "standard";
  j["config"] = std::move(cfg);
  json traj;
  traj["T"] = report.trajectory.T();
  traj["final_state"] = std::vector<double>(
      report.trajectory.x.row(report.trajectory.T()).begin(),
      report.trajectory.x.row(report.trajectory.T()).end());
  j["trajectory"] = std::move(traj);
  j["wallclock_seconds"] = report.wallclock_seconds;
  return j.dump(2) + "\n";
}

SolveOutputs run_solve(const Scenario &scenario, const RunOptions &opts) {
  Scenario s = scenario;
  if (opts.seed) s.ccp.rng_seed = *opts.seed;
  if (opts.restarts) s.ccp.restarts = *opts.restarts;
  if (opts.k) {
    s.smoothing.k = *opts.k;
    s.ccp.k = *opts.k;
  }
  if (opts.tau) s.ccp.penalty_weight = *opts.tau;
  if (opts.until_sem) s.until_sem = *opts.until_sem;
  s.validate();

  const Formula formula = s.build_formula();
  const OpTree tree = unfold(formula, 0, s.T, s.until_sem);
  CcpReport report = solve_ccp(tree, s.system, s.x0, s.T, s.ccp);

  std::filesystem::create_directories(opts.out_dir);
  SolveOutputs out;
  out.report = report;
  out.result_json_path = (std::filesystem::path(opts.out_dir) / "result.json").string();
  out.trajectory_csv_path =
      (std::filesystem::path(opts.out_dir) / "trajectory.csv").string();
  {
    std::ofstream f(out.result_json_path);
    if (!f) throw std::runtime_error("cannot write '" + out.result_json_path + "'");
    f << report_to_json(report, s);
  }
  write_trajectory_csv(report.trajectory, out.trajectory_csv_path);
  if (opts.svg) {
    out.svg_path = (std::filesystem::path(opts.out_dir) / "workspace.svg").string();
    write_workspace_svg(s, report.trajectory, out.svg_path);
  }
  STLSYNTH_LOG_INFO("solve: status=%s robustness=%.6f s_xi=%.6f iters=%d",
                    to_string(report.status), report.exact_robustness, report.s_xi,
                    report.iterations);
  return out;
}

// ---------------------------------------------------------------------------
// Horizon sweep

std::vector<int> parse_horizons(const std::string &text) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    int a = 0, b = 0, s = 0;
    if (std::sscanf(text.c_str(), "%d:%d:%d", &a, &b, &s) != 3 || s <= 0 || b < a)
      throw std::invalid_argument("horizon range must be a:b:s with s > 0");
    for (int t = a; t <= b; t += s) out.push_back(t);
    return out;
  }
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
  if (out.empty()) throw std::invalid_argument("empty horizon list");
  return out;
}

SweepResult run_sweep(const Scenario &scenario, const std::vector<int> &horizons,
                      int trials, const std::string &out_csv) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  const int cells = static_cast<int>(horizons.size()) * trials;
  SweepResult result;
  result.rows.resize(cells);

#pragma omp parallel for schedule(dynamic, 1)
  for (int cell = 0; cell < cells; ++cell) {
    const int hi = cell / trials;
    const int trial = cell % trials;
    SweepRow row;
    row.T = horizons[hi];
    row.seed = scenario.ccp.rng_seed + trial;
    try {
      Scenario s = scenario;
      s.T = row.T;
      s.ccp.rng_seed = row.seed;
      s.ccp.restarts = 1;
      s.ccp.parallel_restarts = false; // the sweep already owns the threads
      s.validate();
      const Formula formula = s.build_formula();
      const OpTree tree = unfold(formula, 0, s.T, s.until_sem);
      CcpReport rep = solve_ccp(tree, s.system, s.x0, s.T, s.ccp);
      row.wallclock_seconds = rep.wallclock_seconds;
      row.exact_robustness = rep.exact_robustness;
      row.status = to_string(rep.status);
    } catch (const std::exception &e) {
      row.status = "error";
      row.exact_robustness = -std::numeric_limits<double>::infinity();
      STLSYNTH_LOG_ERROR("sweep cell T=%d trial=%d failed: %s", row.T, trial, e.what());
    }
    result.rows[cell] = std::move(row);
  }

  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot write '" + out_csv + "'");
  out << "T,seed,wallclock_seconds,exact_robustness,status\n";
  for (const auto &row : result.rows)
    out << row.T << "," << row.seed << "," << fmt_full(row.wallclock_seconds) << ","
        << fmt_full(row.exact_robustness) << "," << row.status << "\n";

  // per-horizon summary
  std::printf("%8s %10s %12s %10s\n", "T", "mean_time", "mean_robust", "success");
  for (size_t hi = 0; hi < horizons.size(); ++hi) {
    double time_sum = 0, rob_sum = 0;
    int ok = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const SweepRow &row = result.rows[hi * trials + trial];
      time_sum += row.wallclock_seconds;
      rob_sum += row.exact_robustness;
      if (row.exact_robustness >= 0) ++ok;
    }
    std::printf("%8d %10.3f %12.5f %7d/%d\n", horizons[hi], time_sum / trials,
                rob_sum / trials, ok, trials);
  }
  return result;
}

} // namespace stlsynth
