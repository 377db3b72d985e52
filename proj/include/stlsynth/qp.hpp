/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include "stlsynth/kernels.hpp"

namespace stlsynth::qp {

/// Convex quadratic program
///   minimize 0.5 z'Pz + q'z
///   s.t.     A_in z <= b_in,  A_eq z = b_eq
/// with P symmetric positive semidefinite (P = 0 gives an LP). Constraint
/// data is stored sparse by rows.
struct Problem {
  RowMatrix P;
  Vector q;
  RowMatrix A_in;
  Vector b_in;
  RowMatrix A_eq;
  Vector b_eq;

  int num_vars() const { return static_cast<int>(q.size()); }

  /// Dimension consistency, symmetry of P, and an eigenvalue floor of
  /// -1e-8 on its symmetric part (checked densely up to moderate sizes,
  /// by the diagonal when P is diagonal). Throws std::invalid_argument.
  void validate() const;
};

enum class Status { optimal, max_iter, infeasible };

struct Solution {
  Vector z;
  Vector y_eq; // multipliers of A_eq z = b_eq
  Vector y_in; // multipliers of A_in z <= b_in, >= 0 at optimality
  Status status = Status::max_iter;
  double primal_residual = 0;
  double dual_residual = 0;
  double comp_slack_residual = 0;
  double duality_gap = 0; // estimate
  int iterations = 0;
  double objective = 0;
};

struct Settings {
  double tol = 1e-6;   // infinity-norm bound on every KKT residual
  int max_iter = 4000; // ADMM iterations
  double rho = 0.1;    // dual step size; equality rows get rho * 1e3
  double sigma = 1e-6;
  double alpha = 1.6;
  bool adaptive_rho = true;
  bool polish = true;
  bool scaling = true; // Ruiz equilibration of the problem data
  Vector warm_z; // empty = cold start
  Vector warm_y; // stacked (eq, in), optional
};

/// Operator-splitting solve with active-set polishing. Status optimal
/// means stationarity, primal feasibility, and complementary slackness
/// all within settings.tol in the infinity norm.
Solution solve(const Problem &p, const Settings &settings = {});

inline Solution solve_qp(const Problem &p, double tol = 1e-6, int max_iter = 4000) {
  Settings s;
  s.tol = tol;
  s.max_iter = max_iter;
  return solve(p, s);
}

} // namespace stlsynth::qp
