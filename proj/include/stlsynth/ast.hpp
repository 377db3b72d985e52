/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlsynth {

/// Affine halfspace predicate a'x_t - b <= 0.
struct LinearPredicate {
  Eigen::VectorXd a; // per-state coefficients, never all zero
  double b = 0.0;

  double value(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    return a.dot(x) - b;
  }
};

bool operator==(const LinearPredicate &lhs, const LinearPredicate &rhs);

/// Temporal-logic formula over signals x0..x{n-1}. Negation nodes are
/// permitted at parse time only; to_nnf removes them.
struct Formula {
  enum class Kind { pred, conj, disj, always, eventually, until, neg };
  Kind kind = Kind::pred;
  LinearPredicate pred;          // kind == pred
  int t1 = 0, t2 = 0;            // always / eventually / until
  std::vector<Formula> children; // conj/disj >= 2, temporal 1, until 2, neg 1
};

bool operator==(const Formula &lhs, const Formula &rhs);

Formula make_pred(Eigen::VectorXd a, double b);
Formula make_and(std::vector<Formula> children);
Formula make_or(std::vector<Formula> children);
Formula make_always(int t1, int t2, Formula child);
Formula make_eventually(int t1, int t2, Formula child);
Formula make_until(int t1, int t2, Formula left, Formula right);
Formula make_not(Formula child);

/// Time-unfolded max/min operator tree over time-indexed predicates.
struct OpTree {
  enum class Kind { max_node, min_node, leaf };
  Kind kind = Kind::leaf;
  LinearPredicate pred; // leaf
  int timestep = 0;     // leaf
  std::vector<OpTree> children;
};

bool operator==(const OpTree &lhs, const OpTree &rhs);

OpTree make_leaf(LinearPredicate pred, int timestep);
OpTree make_max(std::vector<OpTree> children);
OpTree make_min(std::vector<OpTree> children);

/// Axis-aligned rectangle on the first two signals, used by DSL region
/// sugar and the benchmark scenarios.
struct Box {
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
};

using RegionTable = std::map<std::string, Box>;

struct ParseError : std::runtime_error {
  int line = 1, col = 1;
  ParseError(const std::string &msg, int line_, int col_);
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/*
 * DSL grammar (precedence from loosest to tightest: | < & < U < prefix):
 *
 *   formula  := or
 *   or       := and ('|' and)*
 *   and      := until ('&' until)*
 *   until    := prefix ('U[' int ',' int ']' until)?       right assoc
 *   prefix   := '!' prefix | 'G[' int ',' int ']' prefix
 *             | 'F[' int ',' int ']' prefix | primary
 *   primary  := '(' formula ')' | 'in' region | '!in' region | pred
 *   pred     := linexpr ('<='|'>=') linexpr
 *   linexpr  := ['+'|'-'] term (('+'|'-') term)*
 *   term     := number ['*' signal] | signal
 *   region   := 'BOX(' num ',' num ',' num ',' num ')' | name
 *
 * Signals are x0..x{dim-1}. Interval bounds are timesteps with t1 < t2.
 * 'in' expands to the four-halfspace conjunction of the box, '!in' to the
 * complementary disjunction (boundaries kept non-strict).
 */
Formula parse(const std::string &text, int dim,
              const RegionTable &regions = {});

/// Canonical text form; parse(to_string(f), dim) rebuilds f structurally.
std::string to_string(const Formula &f);

/// Region sugar used by parse() and the scenario builder.
Formula box_membership(const Box &box, int dim);
Formula box_avoidance(const Box &box, int dim);

/// Negation normal form. Predicate negation flips non-strictly
/// (not(a'x <= b) becomes -a'x <= -b); negated until is unsupported.
Formula to_nnf(const Formula &f);

bool is_nnf(const Formula &f);

/// Minimum trajectory length needed to evaluate f from timestep 0.
int horizon(const Formula &f);

enum class UntilSemantics {
  paper,    // max over t' of min(left@t', min over t'' in [t+t1,t'] of right@t'')
  standard, // min over t' of max(right@t', max over t'' in [t,t'] of left@t'')
};

/// Unfold an NNF formula anchored at timestep t into a simplified operator
/// tree whose leaves reference timesteps <= T. Conjunction and always map
/// to max nodes, disjunction and eventually to min nodes.
OpTree unfold(const Formula &f, int t, int T,
              UntilSemantics sem = UntilSemantics::paper);

/// Flatten same-polarity parent/child pairs and collapse single-child
/// nodes until max and min levels strictly alternate.
OpTree simplify(const OpTree &t);

/// True when no max node has a max child, no min node has a min child,
/// and no internal node has fewer than two children.
bool alternation_ok(const OpTree &t);

int max_leaf_timestep(const OpTree &t);

/// Largest number of min nodes on any root-to-leaf path.
int min_depth(const OpTree &t);

/// Largest min-node fan-in (0 when the tree has no min node).
int max_min_fanin(const OpTree &t);

} // namespace stlsynth
