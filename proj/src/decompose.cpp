/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/decompose.hpp"

#include "stlsynth/robustness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlsynth {

int DcProgram::num_max_rows() const {
  return static_cast<int>(
      std::count(in_class.begin(), in_class.end(), IneqClass::max_row));
}

namespace {

using Triplet = Eigen::Triplet<double>;

struct Builder {
  VarLayout layout;
  std::vector<Triplet> eq_trip, in_trip;
  std::vector<double> eq_rhs, in_rhs;
  std::vector<EqClass> eq_class;
  std::vector<IneqClass> in_class;
  std::vector<ConcaveRow> concave;

  int new_epi() { return layout.epi_index(layout.epi_count++); }

  void eq_row_done(double rhs, EqClass cls) {
    eq_rhs.push_back(rhs);
    eq_class.push_back(cls);
  }

  void in_row_done(double rhs, IneqClass cls) {
    in_rhs.push_back(rhs);
    in_class.push_back(cls);
  }

  // leaf predicate bounded by variable at column rhs_col: a'x_t - b <= s
  void max_row(const OpTree &leaf, int rhs_col) {
    const int row = static_cast<int>(in_rhs.size());
    for (Eigen::Index i = 0; i < leaf.pred.a.size(); ++i)
      if (leaf.pred.a[i] != 0.0)
        in_trip.emplace_back(row, layout.x_index(leaf.timestep, static_cast<int>(i)),
                             leaf.pred.a[i]);
    in_trip.emplace_back(row, rhs_col, -1.0);
    in_row_done(leaf.pred.b, IneqClass::max_row);
  }

  void decompose_min(const OpTree &node, int rhs_col);

  void decompose_into(const OpTree &node, int rhs_col) {
    switch (node.kind) {
      case OpTree::Kind::leaf:
        max_row(node, rhs_col);
        return;
      case OpTree::Kind::max_node:
        for (const auto &child : node.children) {
          if (child.kind == OpTree::Kind::leaf) max_row(child, rhs_col);
          else decompose_min(child, rhs_col);
        }
        return;
      case OpTree::Kind::min_node:
        decompose_min(node, rhs_col);
        return;
    }
  }
};

void Builder::decompose_min(const OpTree &node, int rhs_col) {
  ConcaveRow row;
  row.rhs_index = rhs_col;
  for (const auto &child : node.children) {
    if (child.kind == OpTree::Kind::leaf) {
      AffineTerm term;
      term.kind = AffineTerm::Kind::predicate;
      term.pred = child.pred;
      term.timestep = child.timestep;
      row.terms.push_back(std::move(term));
    } else {
      // fresh variable bounding the max child, then recurse beneath it
      const int epi_col = new_epi();
      AffineTerm term;
      term.kind = AffineTerm::Kind::epigraph;
      term.var_index = epi_col;
      row.terms.push_back(std::move(term));
      decompose_into(child, epi_col);
    }
  }
  concave.push_back(std::move(row));
}

} // namespace

DcProgram decompose(const OpTree &tree, const LinearSystem &sys,
                    const Eigen::VectorXd &x0, int T, double k) {
  sys.validate();
  if (k <= 0.0) throw std::invalid_argument("smooth parameter must be positive");
  if (x0.size() != sys.n())
    throw std::invalid_argument("initial state has wrong dimension");
  if (T < 1) throw std::invalid_argument("horizon must be at least 1");
  if (tree.kind != OpTree::Kind::leaf && !alternation_ok(tree))
    throw std::invalid_argument("operator tree must be simplified first");
  if (max_leaf_timestep(tree) > T)
    throw std::invalid_argument("tree references timesteps beyond the horizon");

  Builder b;
  b.layout = VarLayout{sys.n(), sys.m(), T, 0};
  const int n = sys.n(), m = sys.m();

  // initial state
  for (int i = 0; i < n; ++i) {
    const int row = static_cast<int>(b.eq_rhs.size());
    b.eq_trip.emplace_back(row, b.layout.x_index(0, i), 1.0);
    b.eq_row_done(x0[i], EqClass::initial);
  }
  // state equations x_{t+1} - A x_t - B u_t = 0
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      const int row = static_cast<int>(b.eq_rhs.size());
      b.eq_trip.emplace_back(row, b.layout.x_index(t + 1, i), 1.0);
      for (int j = 0; j < n; ++j)
        if (sys.A(i, j) != 0.0)
          b.eq_trip.emplace_back(row, b.layout.x_index(t, j), -sys.A(i, j));
      for (int j = 0; j < m; ++j)
        if (sys.B(i, j) != 0.0)
          b.eq_trip.emplace_back(row, b.layout.u_index(t, j), -sys.B(i, j));
      b.eq_row_done(0.0, EqClass::dynamics);
    }
  }

  // box bounds
  for (int t = 0; t <= T; ++t) {
    for (int i = 0; i < n; ++i) {
      int row = static_cast<int>(b.in_rhs.size());
      b.in_trip.emplace_back(row, b.layout.x_index(t, i), 1.0);
      b.in_row_done(sys.x_hi[i], IneqClass::state_bound);
      row = static_cast<int>(b.in_rhs.size());
      b.in_trip.emplace_back(row, b.layout.x_index(t, i), -1.0);
      b.in_row_done(-sys.x_lo[i], IneqClass::state_bound);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < m; ++j) {
      int row = static_cast<int>(b.in_rhs.size());
      b.in_trip.emplace_back(row, b.layout.u_index(t, j), 1.0);
      b.in_row_done(sys.u_hi[j], IneqClass::input_bound);
      row = static_cast<int>(b.in_rhs.size());
      b.in_trip.emplace_back(row, b.layout.u_index(t, j), -1.0);
      b.in_row_done(-sys.u_lo[j], IneqClass::input_bound);
    }
  }

  // s_xi <= 0, then the recursive decomposition against s_xi
  {
    const int row = static_cast<int>(b.in_rhs.size());
    b.in_trip.emplace_back(row, b.layout.s_xi_index(), 1.0);
    b.in_row_done(0.0, IneqClass::root_bound);
  }
  b.decompose_into(tree, b.layout.s_xi_index());

  DcProgram prog;
  prog.layout = b.layout;
  prog.k = k;
  prog.eq_A.resize(static_cast<Eigen::Index>(b.eq_rhs.size()), prog.layout.size());
  prog.eq_A.setFromTriplets(b.eq_trip.begin(), b.eq_trip.end());
  prog.eq_b = Eigen::Map<Vector>(b.eq_rhs.data(), static_cast<Eigen::Index>(b.eq_rhs.size()));
  prog.eq_class = std::move(b.eq_class);
  prog.in_A.resize(static_cast<Eigen::Index>(b.in_rhs.size()), prog.layout.size());
  prog.in_A.setFromTriplets(b.in_trip.begin(), b.in_trip.end());
  prog.in_b = Eigen::Map<Vector>(b.in_rhs.data(), static_cast<Eigen::Index>(b.in_rhs.size()));
  prog.in_class = std::move(b.in_class);
  prog.concave = std::move(b.concave);
  return prog;
}

// ---------------------------------------------------------------------------
// Feasible embedding

namespace {

struct Embedder {
  const Trajectory &traj;
  double k;
  Vector &z;
  const VarLayout &layout;
  int counter = 0;

  double walk(const OpTree &node) {
    if (node.kind == OpTree::Kind::leaf)
      return node.pred.a.dot(traj.x.row(node.timestep)) - node.pred.b;
    if (node.kind == OpTree::Kind::max_node) {
      double acc = -std::numeric_limits<double>::infinity();
      for (const auto &c : node.children) acc = std::max(acc, walk(c));
      return acc;
    }
    std::vector<double> vals;
    vals.reserve(node.children.size());
    for (const auto &c : node.children) {
      if (c.kind == OpTree::Kind::leaf) {
        vals.push_back(walk(c));
      } else {
        // slot allocation order mirrors decompose()
        const int slot = counter++;
        double v = walk(c);
        z[layout.epi_index(slot)] = v;
        vals.push_back(v);
      }
    }
    return smooth_min(vals, k);
  }
};

} // namespace

Vector feasible_embed(const OpTree &tree, const DcProgram &prog,
                      const Trajectory &traj) {
  const VarLayout &layout = prog.layout;
  if (traj.n() != layout.n || traj.m() != layout.m || traj.T() != layout.T)
    throw std::invalid_argument("trajectory shape does not match program layout");
  Vector z = Vector::Zero(layout.size());
  for (int t = 0; t <= layout.T; ++t)
    for (int i = 0; i < layout.n; ++i) z[layout.x_index(t, i)] = traj.x(t, i);
  for (int t = 0; t < layout.T; ++t)
    for (int j = 0; j < layout.m; ++j) z[layout.u_index(t, j)] = traj.u(t, j);
  Embedder emb{traj, prog.k, z, layout, 0};
  const double root = emb.walk(tree);
  if (emb.counter != layout.epi_count)
    throw std::invalid_argument("tree does not match the decomposed program");
  z[layout.s_xi_index()] = root;
  return z;
}

double term_value(const AffineTerm &term, const Vector &z, const VarLayout &layout) {
  if (term.kind == AffineTerm::Kind::epigraph) return z[term.var_index];
  double acc = -term.pred.b;
  for (Eigen::Index i = 0; i < term.pred.a.size(); ++i)
    acc += term.pred.a[i] * z[layout.x_index(term.timestep, static_cast<int>(i))];
  return acc;
}

double concave_row_value(const ConcaveRow &row, const Vector &z,
                         const VarLayout &layout, double k) {
  std::vector<double> vals;
  vals.reserve(row.terms.size());
  for (const auto &term : row.terms) vals.push_back(term_value(term, z, layout));
  return smooth_min(vals, k);
}

double FeasReport::max_violation() const {
  return std::max({eq, bound, root, max_row, concave});
}

FeasReport check_feasible(const DcProgram &prog, const Vector &z, double /*tol*/) {
  if (z.size() != prog.layout.size())
    throw std::invalid_argument("decision vector has wrong dimension");
  FeasReport rep;
  Vector r;
  kernels::spmv(prog.eq_A, z, r);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    rep.eq = std::max(rep.eq, std::abs(r[i] - prog.eq_b[i]));
  kernels::spmv(prog.in_A, z, r);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double viol = r[i] - prog.in_b[i];
    if (viol <= 0) continue;
    switch (prog.in_class[i]) {
      case IneqClass::state_bound:
      case IneqClass::input_bound:
        rep.bound = std::max(rep.bound, viol);
        break;
      case IneqClass::root_bound:
        rep.root = std::max(rep.root, viol);
        break;
      case IneqClass::max_row:
        rep.max_row = std::max(rep.max_row, viol);
        break;
    }
  }
  for (const auto &row : prog.concave) {
    const double viol = concave_row_value(row, z, prog.layout, prog.k) - z[row.rhs_index];
    rep.concave = std::max(rep.concave, viol);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Debug dump

std::string debug_dump_json(const DcProgram &prog) {
  using json = nlohmann::ordered_json;
  json out;
  out["layout"] = {{"n", prog.layout.n},
                   {"m", prog.layout.m},
                   {"T", prog.layout.T},
                   {"epi_count", prog.layout.epi_count},
                   {"s_xi_index", prog.layout.s_xi_index()}};
  out["k"] = prog.k;

  auto dump_rows = [](const RowMatrix &A, const Vector &b, auto class_name) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      json row;
      json cols = json::array(), vals = json::array();
      for (RowMatrix::InnerIterator it(A, r); it; ++it) {
        cols.push_back(static_cast<int>(it.col()));
        vals.push_back(it.value());
      }
      row["cols"] = std::move(cols);
      row["vals"] = std::move(vals);
      row["rhs"] = b[r];
      row["class"] = class_name(r);
      rows.push_back(std::move(row));
    }
    return rows;
  };

  out["eq"] = dump_rows(prog.eq_A, prog.eq_b, [&](Eigen::Index r) {
    return prog.eq_class[r] == EqClass::dynamics ? "dynamics" : "initial";
  });
  out["ineq"] = dump_rows(prog.in_A, prog.in_b, [&](Eigen::Index r) {
    switch (prog.in_class[r]) {
      case IneqClass::state_bound: return "state_bound";
      case IneqClass::input_bound: return "input_bound";
      case IneqClass::root_bound: return "root_bound";
      case IneqClass::max_row: return "max_row";
    }
    return "unknown";
  });

  json concave = json::array();
  for (const auto &row : prog.concave) {
    json jrow;
    json terms = json::array();
    for (const auto &term : row.terms) {
      json jt;
      if (term.kind == AffineTerm::Kind::predicate) {
        jt["kind"] = "predicate";
        json a = json::array();
        for (Eigen::Index i = 0; i < term.pred.a.size(); ++i) a.push_back(term.pred.a[i]);
        jt["a"] = std::move(a);
        jt["b"] = term.pred.b;
        jt["t"] = term.timestep;
      } else {
        jt["kind"] = "epigraph";
        jt["index"] = term.var_index;
      }
      terms.push_back(std::move(jt));
    }
    jrow["terms"] = std::move(terms);
    jrow["rhs_index"] = row.rhs_index;
    concave.push_back(std::move(jrow));
  }
  out["concave"] = std::move(concave);
  return out.dump(2);
}

} // namespace stlsynth
