/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/ccp.hpp"

#include "stlsynth/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace stlsynth {

Eigen::MatrixXd CcpConfig::effective_Q(int n) const {
  if (Q.size() > 0) {
    if (Q.rows() != n || Q.cols() != n)
      throw std::invalid_argument("Q must be n x n");
    return Q;
  }
  Eigen::MatrixXd def = Eigen::MatrixXd::Zero(n, n);
  if (n == 4) {
    def(2, 2) = 1.0;
    def(3, 3) = 1.0;
  }
  return def;
}

Eigen::MatrixXd CcpConfig::effective_R(int m) const {
  if (R.size() > 0) {
    if (R.rows() != m || R.cols() != m)
      throw std::invalid_argument("R must be m x m");
    return R;
  }
  return Eigen::MatrixXd::Identity(m, m);
}

void CcpConfig::validate() const {
  if (k <= 0) throw std::invalid_argument("smooth parameter must be positive");
  if (penalty_weight <= 0) throw std::invalid_argument("penalty weight must be positive");
  if (quad_weight < 0) throw std::invalid_argument("quadratic weight must be nonnegative");
  if (max_outer_iter < 1 || restarts < 1)
    throw std::invalid_argument("iteration and restart counts must be positive");
  if (cost_tol <= 0) throw std::invalid_argument("cost tolerance must be positive");
}

const char *to_string(CcpStatus s) {
  switch (s) {
    case CcpStatus::converged: return "converged";
    case CcpStatus::max_iter: return "max_iter";
    case CcpStatus::qp_failure: return "qp_failure";
  }
  return "unknown";
}

qp::Problem linearize(const DcProgram &prog, const Vector &z_hat,
                      const CcpConfig &cfg) {
  const VarLayout &layout = prog.layout;
  const int H = layout.size();
  const int W = static_cast<int>(prog.concave.size());
  if (z_hat.size() != H)
    throw std::invalid_argument("linearization point has wrong dimension");
  const int hq = H + W;

  qp::Problem out;
  out.q = Vector::Zero(hq);
  out.q[layout.s_xi_index()] = 1.0;
  for (int i = 0; i < W; ++i) out.q[H + i] = cfg.penalty_weight;

  // quadratic state/input cost blocks
  std::vector<Eigen::Triplet<double>> ptrip;
  if (cfg.quad_weight > 0) {
    const Eigen::MatrixXd Q = 2.0 * cfg.quad_weight * cfg.effective_Q(layout.n);
    const Eigen::MatrixXd R = 2.0 * cfg.quad_weight * cfg.effective_R(layout.m);
    for (int t = 0; t <= layout.T; ++t)
      for (int i = 0; i < layout.n; ++i)
        for (int j = 0; j < layout.n; ++j)
          if (Q(i, j) != 0.0)
            ptrip.emplace_back(layout.x_index(t, i), layout.x_index(t, j), Q(i, j));
    for (int t = 0; t < layout.T; ++t)
      for (int i = 0; i < layout.m; ++i)
        for (int j = 0; j < layout.m; ++j)
          if (R(i, j) != 0.0)
            ptrip.emplace_back(layout.u_index(t, i), layout.u_index(t, j), R(i, j));
  }
  out.P.resize(hq, hq);
  out.P.setFromTriplets(ptrip.begin(), ptrip.end());

  // affine rows carry over with widened column space
  std::vector<Eigen::Triplet<double>> etrip;
  for (Eigen::Index r = 0; r < prog.eq_A.rows(); ++r)
    for (RowMatrix::InnerIterator it(prog.eq_A, r); it; ++it)
      etrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  out.A_eq.resize(prog.eq_A.rows(), hq);
  out.A_eq.setFromTriplets(etrip.begin(), etrip.end());
  out.b_eq = prog.eq_b;

  std::vector<Eigen::Triplet<double>> itrip;
  std::vector<double> irhs;
  for (Eigen::Index r = 0; r < prog.in_A.rows(); ++r)
    for (RowMatrix::InnerIterator it(prog.in_A, r); it; ++it)
      itrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  for (Eigen::Index r = 0; r < prog.in_b.size(); ++r) irhs.push_back(prog.in_b[r]);

  // tangent of each smoothed-min row at z_hat, relaxed by its slack
  for (int ci = 0; ci < W; ++ci) {
    const ConcaveRow &row = prog.concave[ci];
    const int r = static_cast<int>(irhs.size());
    std::vector<double> vals(row.terms.size());
    for (size_t j = 0; j < row.terms.size(); ++j)
      vals[j] = term_value(row.terms[j], z_hat, layout);
    const double lo = *std::min_element(vals.begin(), vals.end());
    double denom = 0.0;
    for (double v : vals) denom += std::exp(-cfg.k * (v - lo));
    const double smin = lo - std::log(denom) / cfg.k;

    double rhs = 0.0;       // accumulates sum_j w_j b_j for predicate terms
    double weighted = 0.0;  // sum_j w_j val_j
    for (size_t j = 0; j < row.terms.size(); ++j) {
      const double wgt = std::exp(-cfg.k * (vals[j] - lo)) / denom;
      weighted += wgt * vals[j];
      const AffineTerm &term = row.terms[j];
      if (term.kind == AffineTerm::Kind::predicate) {
        for (Eigen::Index i = 0; i < term.pred.a.size(); ++i)
          if (term.pred.a[i] != 0.0)
            itrip.emplace_back(r, layout.x_index(term.timestep, static_cast<int>(i)),
                               wgt * term.pred.a[i]);
        rhs += wgt * term.pred.b;
      } else {
        itrip.emplace_back(r, term.var_index, wgt);
      }
    }
    const double offset = smin - weighted; // tangent constant, <= 0
    itrip.emplace_back(r, row.rhs_index, -1.0);
    itrip.emplace_back(r, H + ci, -1.0);
    irhs.push_back(rhs - offset);
  }
  // slack nonnegativity
  for (int ci = 0; ci < W; ++ci) {
    itrip.emplace_back(static_cast<int>(irhs.size()), H + ci, -1.0);
    irhs.push_back(0.0);
  }

  out.A_in.resize(static_cast<Eigen::Index>(irhs.size()), hq);
  out.A_in.setFromTriplets(itrip.begin(), itrip.end());
  out.b_in = Eigen::Map<Vector>(irhs.data(), static_cast<Eigen::Index>(irhs.size()));
  return out;
}

Vector initialize(const DcProgram &prog, const OpTree &tree,
                  const LinearSystem &sys, const Eigen::VectorXd &x0,
                  std::uint64_t seed, CcpConfig::Init mode) {
  const VarLayout &layout = prog.layout;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(layout.T, layout.m);
  if (mode == CcpConfig::Init::random_uniform) {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < layout.T; ++t)
      for (int j = 0; j < layout.m; ++j) {
        std::uniform_real_distribution<double> dist(sys.u_lo[j], sys.u_hi[j]);
        u(t, j) = dist(rng);
      }
  }
  const Trajectory traj = rollout(sys, x0, u);
  Vector z = feasible_embed(tree, prog, traj);
  double &s_xi = z[layout.s_xi_index()];
  s_xi = std::min(s_xi, 0.0);
  return z;
}

CcpReport solve_ccp_single(const DcProgram &prog, const OpTree &tree,
                           const LinearSystem &sys, const Eigen::VectorXd &x0,
                           const CcpConfig &cfg, std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();
  const VarLayout &layout = prog.layout;
  const int H = layout.size();
  const int W = static_cast<int>(prog.concave.size());

  CcpReport rep;
  rep.seed = seed;

  Vector z = initialize(prog, tree, sys, x0, seed, cfg.init_mode);
  Vector v = Vector::Zero(W);
  for (int i = 0; i < W; ++i)
    v[i] = std::max(0.0, concave_row_value(prog.concave[i], z, layout, prog.k) -
                             z[prog.concave[i].rhs_index]);

  Vector warm_y;
  double obj_prev = std::numeric_limits<double>::infinity();
  bool stalled = false;

  for (int iter = 0; iter < cfg.max_outer_iter; ++iter) {
    qp::Problem sub = linearize(prog, z, cfg);
    qp::Settings qs;
    qs.tol = cfg.qp_tol;
    qs.max_iter = cfg.qp_max_iter;
    qs.warm_z.resize(H + W);
    qs.warm_z.head(H) = z;
    qs.warm_z.tail(W) = v;
    qs.warm_y = warm_y;
    qp::Solution sol = qp::solve(sub, qs);
    if (sol.status == qp::Status::infeasible || !sol.z.allFinite()) {
      rep.status = CcpStatus::qp_failure;
      rep.iterations = iter;
      break;
    }
    if (sol.status == qp::Status::max_iter)
      STLSYNTH_LOG_DEBUG("ccp iter %d: subproblem stopped at iteration cap "
                         "(residual %.2e)", iter, sol.primal_residual);

    z = sol.z.head(H);
    v = sol.z.tail(W);
    warm_y.resize(sol.y_eq.size() + sol.y_in.size());
    warm_y.head(sol.y_eq.size()) = sol.y_eq;
    warm_y.tail(sol.y_in.size()) = sol.y_in;

    rep.objective_history.push_back(sol.objective);
    rep.violation_history.push_back(check_feasible(prog, z, cfg.qp_tol).concave);
    if (cfg.record_iterates) rep.iterates.push_back(sol.z);
    rep.iterations = iter + 1;

    if (std::abs(sol.objective - obj_prev) < cfg.cost_tol) {
      stalled = true;
      break;
    }
    obj_prev = sol.objective;
  }

  rep.slack_sum = v.size() ? v.sum() : 0.0;
  if (rep.status != CcpStatus::qp_failure)
    rep.status = (stalled && rep.slack_sum <= 1e-6) ? CcpStatus::converged
                                                    : CcpStatus::max_iter;

  // report on the dynamics-exact trajectory recovered from the inputs
  Eigen::MatrixXd u(layout.T, layout.m);
  for (int t = 0; t < layout.T; ++t)
    for (int j = 0; j < layout.m; ++j) u(t, j) = z[layout.u_index(t, j)];
  rep.trajectory = rollout(sys, x0, u);
  rep.s_xi = z[layout.s_xi_index()];
  rep.exact_robustness = eval_original(tree, rep.trajectory);
  rep.smoothed_reversed = eval_smoothed(tree, rep.trajectory, SmoothingConfig{prog.k});
  rep.margin_certified = rep.status == CcpStatus::converged &&
                         rep.s_xi <= -smoothing_gap(tree, prog.k);
  rep.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

CcpReport solve_ccp(const OpTree &tree, const LinearSystem &sys,
                    const Eigen::VectorXd &x0, int T, const CcpConfig &cfg) {
  cfg.validate();
  const DcProgram prog = decompose(tree, sys, x0, T, cfg.k);
  std::vector<CcpReport> reports(cfg.restarts);

#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel_restarts && cfg.restarts > 1)
  for (int i = 0; i < cfg.restarts; ++i)
    reports[i] = solve_ccp_single(prog, tree, sys, x0, cfg, cfg.rng_seed + i);

  int best = 0;
  for (int i = 1; i < cfg.restarts; ++i) {
    const bool best_failed = reports[best].status == CcpStatus::qp_failure;
    const bool cand_failed = reports[i].status == CcpStatus::qp_failure;
    if (cand_failed != best_failed) {
      if (best_failed) best = i;
      continue;
    }
    if (reports[i].exact_robustness > reports[best].exact_robustness) best = i;
  }
  return reports[best];
}

} // namespace stlsynth
