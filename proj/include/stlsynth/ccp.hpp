/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include "stlsynth/decompose.hpp"
#include "stlsynth/qp.hpp"
#include "stlsynth/robustness.hpp"

#include <cstdint>
#include <vector>

namespace stlsynth {

struct CcpConfig {
  double k = 10.0;              // smoothing sharpness
  double penalty_weight = 50.0; // weight on the concave-row slacks
  double quad_weight = 0.001;   // weight on the quadratic state/input cost
  Eigen::MatrixXd Q; // empty: diag(0,0,1,1) when n == 4, else zero
  Eigen::MatrixXd R; // empty: identity
  int max_outer_iter = 100;
  double cost_tol = 1e-4; // stop when the objective change drops below this
  int restarts = 5;
  std::uint64_t rng_seed = 0;

  enum class Init { random_uniform, zero_input };
  Init init_mode = Init::random_uniform;

  double qp_tol = 1e-6;
  int qp_max_iter = 4000;
  bool parallel_restarts = true;
  bool record_iterates = false; // keep every QP solution (z and slacks)

  Eigen::MatrixXd effective_Q(int n) const;
  Eigen::MatrixXd effective_R(int m) const;
  void validate() const;
};

enum class CcpStatus { converged, max_iter, qp_failure };

const char *to_string(CcpStatus s);

struct CcpReport {
  std::vector<double> objective_history; // one entry per completed iteration
  std::vector<double> violation_history; // exact concave-row violation per iteration
  Trajectory trajectory;                 // re-rolled from the returned inputs
  double s_xi = 0;
  double exact_robustness = 0;    // original sign: positive satisfies
  double smoothed_reversed = 0;
  double slack_sum = 0;           // final penalty slacks
  double wallclock_seconds = 0;
  CcpStatus status = CcpStatus::max_iter;
  int iterations = 0;
  std::uint64_t seed = 0;
  bool margin_certified = false;  // s_xi beats the smoothing gap at convergence
  std::vector<Vector> iterates;   // record_iterates: stacked (z, slacks)
};

/// Convex QP majorization of the program at z_hat: every smoothed-min row
/// is replaced by its tangent (a global over-estimator of the concave
/// left-hand side) relaxed by a fresh nonnegative slack, and the cost is
/// s_xi + penalty_weight * sum(slacks)
///      + quad_weight * sum_t (x_t'Q x_t + u_t'R u_t).
/// QP variables are (z, slacks); affine rows carry over verbatim.
qp::Problem linearize(const DcProgram &prog, const Vector &z_hat,
                      const CcpConfig &cfg);

/// Seeded start: inputs sampled uniformly inside the input box (or zero),
/// states from the rollout, epigraph variables from the feasible embedding,
/// s_xi clamped to <= 0. Any resulting concave violation is absorbed by
/// the penalty slacks at the first iteration.
Vector initialize(const DcProgram &prog, const OpTree &tree,
                  const LinearSystem &sys, const Eigen::VectorXd &x0,
                  std::uint64_t seed,
                  CcpConfig::Init mode = CcpConfig::Init::random_uniform);

/// One seeded descent from initialize() to convergence.
CcpReport solve_ccp_single(const DcProgram &prog, const OpTree &tree,
                           const LinearSystem &sys, const Eigen::VectorXd &x0,
                           const CcpConfig &cfg, std::uint64_t seed);

/// Penalty convex-concave procedure with seeded restarts; returns the
/// restart with the best exact robustness (ties: lowest seed offset).
/// Restarts share the decomposition read-only and may run in parallel.
CcpReport solve_ccp(const OpTree &tree, const LinearSystem &sys,
                    const Eigen::VectorXd &x0, int T, const CcpConfig &cfg);

} // namespace stlsynth
