/* SPDX-License-Identifier: Apache-2.0 */
// Independent reference implementations used only by tests. These follow
// different code paths than the library on purpose: the robustness oracle
// recurses over the formula with explicit window loops (never building an
// operator tree), the rollout oracle uses explicit matrix powers, and the
// QP oracle is a projected-gradient loop.
#pragma once

#include "stlsynth/ast.hpp"
#include "stlsynth/qp.hpp"
#include "stlsynth/robustness.hpp"
#include "stlsynth/system.hpp"

#include <random>

namespace oracles {

using namespace stlsynth;

/// Original-semantics robustness (positive = satisfied) evaluated directly
/// on an NNF formula: predicates b - a'x_t, conjunction min, disjunction
/// max, always min over the window, eventually max over the window.
double orig_robustness(const Formula &f, const Trajectory &traj, int t,
                       UntilSemantics sem);

/// x_t = A^t x0 + sum_j A^(t-1-j) B u_j, computed with explicit powers.
Trajectory rollout_powers(const LinearSystem &sys, const Eigen::VectorXd &x0,
                          const Eigen::MatrixXd &u);

/// Central finite differences of eval_smoothed over the stacked states.
Eigen::VectorXd fd_gradient(const OpTree &tree, const Trajectory &traj, double k,
                            double h);

/// True when some max node has two smoothed child values within gap of its
/// best; eval_smoothed is kinked there and finite differences do not apply.
bool near_max_tie(const OpTree &tree, const Trajectory &traj, double k, double gap);

/// Projected gradient on min 0.5 z'Pz + q'z s.t. lo <= z <= hi, run to a
/// fixed-point tolerance. P may be zero (then a unit step is used).
Eigen::VectorXd pg_solve_box(const Eigen::MatrixXd &P, const Eigen::VectorXd &q,
                             const Eigen::VectorXd &lo, const Eigen::VectorXd &hi,
                             double tol = 1e-13, long max_iter = 4000000);

// ---------------------------------------------------------------------------
// Fuzzers

struct FormulaFuzz {
  int dim = 2;
  int max_ops = 6;        // internal operator budget
  int horizon_budget = 8; // keeps horizon(f) within bound
  bool allow_not = true;
  bool allow_until = true;
};

/// Random formula within the operator and horizon budgets; negations (when
/// enabled) never wrap an until so to_nnf always succeeds.
Formula random_formula(std::mt19937_64 &rng, const FormulaFuzz &opts);

/// Random simplified operator tree with leaf timesteps <= T.
OpTree random_tree(std::mt19937_64 &rng, int dim, int T, int max_depth = 4);

Trajectory random_trajectory(std::mt19937_64 &rng, int n, int T, double lo = -5.0,
                             double hi = 5.0);

} // namespace oracles
