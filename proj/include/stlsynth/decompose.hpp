/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include "stlsynth/ast.hpp"
#include "stlsynth/kernels.hpp"
#include "stlsynth/system.hpp"

#include <string>
#include <vector>

namespace stlsynth {

/// Column layout of the stacked decision vector
/// z = (x_0..x_T, u_0..u_{T-1}, s_xi, e_0..e_{E-1}). Every fresh epigraph
/// variable e_i bounds, from above, the value of exactly one max subtree
/// encountered in depth-first decomposition order; s_xi bounds the root.
struct VarLayout {
  int n = 0, m = 0, T = 0;
  int epi_count = 0;

  int x_index(int t, int i) const { return t * n + i; }
  int u_index(int t, int j) const { return n * (T + 1) + t * m + j; }
  int s_xi_index() const { return n * (T + 1) + m * T; }
  int epi_index(int e) const { return s_xi_index() + 1 + e; }
  int size() const { return s_xi_index() + 1 + epi_count; }
};

enum class EqClass { dynamics, initial };
enum class IneqClass { state_bound, input_bound, root_bound, max_row };

/// One argument of a smoothed-min constraint: either a time-indexed
/// predicate a'x_t - b or an epigraph variable standing in for a subtree.
struct AffineTerm {
  enum class Kind { predicate, epigraph };
  Kind kind = Kind::predicate;
  LinearPredicate pred; // predicate
  int timestep = 0;     // predicate
  int var_index = -1;   // epigraph: column in z
};

/// smooth_min(terms) <= z[rhs_index]; the only nonconvex rows of the program.
struct ConcaveRow {
  std::vector<AffineTerm> terms;
  int rhs_index = -1;
};

struct DcProgram {
  VarLayout layout;
  RowMatrix eq_A; // dynamics x_{t+1} = A x_t + B u_t plus x_0 = x0
  Vector eq_b;
  std::vector<EqClass> eq_class;
  RowMatrix in_A; // box bounds, s_xi <= 0, and max-derived rows
  Vector in_b;
  std::vector<IneqClass> in_class;
  std::vector<ConcaveRow> concave;
  double k = 10.0;

  int num_max_rows() const;
};

/// Recursive epigraph decomposition of the minimization of the smoothed
/// reversed robustness of `tree` subject to dynamics and box bounds:
/// leaves under a max become affine rows against the bounding variable,
/// max children recurse with the same bound, and each min node becomes one
/// smoothed-min row whose non-leaf arguments get fresh epigraph variables.
/// The objective of the resulting program is min s_xi.
DcProgram decompose(const OpTree &tree, const LinearSystem &sys,
                    const Eigen::VectorXd &x0, int T, double k);

/// The canonical feasible point for a trajectory: epigraph variables take
/// the smoothed value of the subtree they bound and s_xi the root value.
/// Every row except s_xi <= 0 holds by construction; that one holds iff
/// the smoothed reversed robustness is <= 0.
Vector feasible_embed(const OpTree &tree, const DcProgram &prog,
                      const Trajectory &traj);

double term_value(const AffineTerm &term, const Vector &z, const VarLayout &layout);

/// smooth_min of the row's term values at z.
double concave_row_value(const ConcaveRow &row, const Vector &z,
                         const VarLayout &layout, double k);

/// Worst violation per constraint class; concave rows are evaluated
/// exactly (smoothed min, not a linearization).
struct FeasReport {
  double eq = 0;      // |dynamics/initial residual|
  double bound = 0;   // box rows
  double root = 0;    // s_xi <= 0
  double max_row = 0; // max-derived affine rows
  double concave = 0; // smooth_min(terms) - rhs

  double max_violation() const;
  bool feasible(double tol) const { return max_violation() <= tol; }
};

FeasReport check_feasible(const DcProgram &prog, const Vector &z, double tol);

/// Serialized JSON description of the program for external oracles:
/// {"layout": {"n","m","T","epi_count","s_xi_index"},
///  "k": double,
///  "eq": [{"cols": [..], "vals": [..], "rhs": double, "class": str}, ..],
///  "ineq": [{"cols", "vals", "rhs", "class"}, ..],
///  "concave": [{"terms": [{"kind":"predicate","a":[..],"b":..,"t":..} |
///               {"kind":"epigraph","index":..}], "rhs_index": int}, ..]}
std::string debug_dump_json(const DcProgram &prog);

} // namespace stlsynth
