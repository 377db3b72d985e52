/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/ast.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace stlsynth;

namespace {

Eigen::VectorXd e(int dim, int i, double v = 1.0) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
  a[i] = v;
  return a;
}

} // namespace

TEST_CASE("parse eventually over a simple predicate") {
  Formula f = parse("F[0,10](x0 <= 5)", 4);
  REQUIRE(f.kind == Formula::Kind::eventually);
  CHECK(f.t1 == 0);
  CHECK(f.t2 == 10);
  REQUIRE(f.children[0].kind == Formula::Kind::pred);
  CHECK(f.children[0].pred.a == e(4, 0));
  CHECK(f.children[0].pred.b == 5.0);
}

TEST_CASE("parse keeps negation nodes") {
  Formula f = parse("G[0,2](!(x0 <= 3))", 2);
  REQUIRE(f.kind == Formula::Kind::always);
  REQUIRE(f.children[0].kind == Formula::Kind::neg);
  REQUIRE(f.children[0].children[0].kind == Formula::Kind::pred);
  CHECK(f.children[0].children[0].pred.b == 3.0);
}

TEST_CASE("parse rejects degenerate intervals") {
  CHECK_THROWS_AS(parse("F[3,3](x0<=1)", 2), ParseError);
  CHECK_THROWS_AS(parse("F[4,3](x0<=1)", 2), ParseError);
}

TEST_CASE("parse reports unknown signals and syntax errors with position") {
  try {
    parse("F[0,2](x7 <= 1)", 4);
    FAIL("expected ParseError");
  } catch (const ParseError &err) {
    CHECK(err.line == 1);
    CHECK(err.col > 1);
  }
  CHECK_THROWS_AS(parse("F[0,2](x0 <= )", 4), ParseError);
  CHECK_THROWS_AS(parse("F[0,2](x0 < 1)", 4), ParseError);
  CHECK_THROWS_AS(parse("(x0 <= 1", 4), ParseError);
  CHECK_THROWS_AS(parse("in NOWHERE", 4), ParseError);
  CHECK_THROWS_AS(parse("3 <= 5", 4), ParseError); // no signal appears
}

TEST_CASE("precedence: prefix > until > and > or") {
  Formula f = parse("x0 <= 1 & x0 <= 2 | x0 <= 3", 1);
  REQUIRE(f.kind == Formula::Kind::disj);
  REQUIRE(f.children[0].kind == Formula::Kind::conj);
  CHECK(f.children[0].children.size() == 2);

  Formula g = parse("G[0,2] x0 <= 1 & x0 <= 2", 1);
  REQUIRE(g.kind == Formula::Kind::conj);
  CHECK(g.children[0].kind == Formula::Kind::always);

  Formula u = parse("x0 <= 1 U[0,3] x0 <= 2 & x0 <= 3", 1);
  REQUIRE(u.kind == Formula::Kind::conj);
  CHECK(u.children[0].kind == Formula::Kind::until);
}

TEST_CASE("n-ary conjunction collects all children") {
  Formula f = parse("x0 <= 1 & x0 <= 2 & x0 <= 3", 1);
  REQUIRE(f.kind == Formula::Kind::conj);
  CHECK(f.children.size() == 3);
}

TEST_CASE("linear expressions fold constants and both comparison directions") {
  Formula f = parse("2*x0 - x1 + 1 <= 4", 2);
  REQUIRE(f.kind == Formula::Kind::pred);
  CHECK(f.pred.a[0] == 2.0);
  CHECK(f.pred.a[1] == -1.0);
  CHECK(f.pred.b == 3.0);

  Formula g = parse("x0 >= 4", 2); // flips to -x0 <= -4
  CHECK(g.pred.a[0] == -1.0);
  CHECK(g.pred.b == -4.0);
}

TEST_CASE("region sugar expands at parse time") {
  RegionTable regions{{"B1", Box{1, 3, 7, 9}}};
  Formula f = parse("in B1", 4, regions);
  REQUIRE(f.kind == Formula::Kind::conj);
  CHECK(f.children.size() == 4);

  Formula g = parse("!in BOX(4,6,4,6)", 4);
  REQUIRE(g.kind == Formula::Kind::disj);
  REQUIRE(g.children.size() == 4);
  // first disjunct: x0 <= 4
  CHECK(g.children[0].pred.a == e(4, 0));
  CHECK(g.children[0].pred.b == 4.0);
}

TEST_CASE("nnf flips predicates non-strictly") {
  Formula f = to_nnf(make_not(make_pred(e(2, 0), 3.0)));
  REQUIRE(f.kind == Formula::Kind::pred);
  CHECK(f.pred.a == e(2, 0, -1.0));
  CHECK(f.pred.b == -3.0);
}

TEST_CASE("nnf applies De Morgan and temporal duals") {
  Formula p = make_pred(e(2, 0), 1.0), q = make_pred(e(2, 1), 2.0);
  Formula f = to_nnf(make_not(make_and({p, q})));
  REQUIRE(f.kind == Formula::Kind::disj);
  CHECK(f.children[0].pred.a == e(2, 0, -1.0));
  CHECK(f.children[1].pred.a == e(2, 1, -1.0));

  Formula g = to_nnf(make_not(make_always(0, 2, p)));
  REQUIRE(g.kind == Formula::Kind::eventually);
  CHECK(g.t1 == 0);
  CHECK(g.t2 == 2);
  CHECK(g.children[0].pred.a == e(2, 0, -1.0));

  Formula h = to_nnf(make_not(make_eventually(1, 3, q)));
  REQUIRE(h.kind == Formula::Kind::always);
}

TEST_CASE("negated until is rejected") {
  Formula u = make_until(0, 2, make_pred(e(1, 0), 1.0), make_pred(e(1, 0), 2.0));
  CHECK_THROWS_AS(to_nnf(make_not(u)), UnsupportedError);
}

TEST_CASE("simplify flattens and collapses") {
  LinearPredicate p{e(1, 0), 0.0};
  OpTree l1 = make_leaf(p, 0), l2 = make_leaf(p, 1), l3 = make_leaf(p, 2);

  OpTree a = simplify(make_max({make_max({l1, l2}), l3}));
  REQUIRE(a.kind == OpTree::Kind::max_node);
  CHECK(a.children.size() == 3);

  OpTree b = simplify(make_min({l1}));
  CHECK(b.kind == OpTree::Kind::leaf);

  OpTree c = simplify(make_max({make_min({l1, make_min({l2, l3})})}));
  REQUIRE(c.kind == OpTree::Kind::min_node);
  CHECK(c.children.size() == 3);
}

TEST_CASE("horizon recursion") {
  Formula p = make_pred(e(2, 0), 1.0);
  CHECK(horizon(p) == 0);
  CHECK(horizon(make_eventually(0, 10, p)) == 10);
  CHECK(horizon(make_always(2, 5, make_eventually(0, 3, p))) == 8);
  Formula u = make_until(0, 4, make_eventually(0, 2, p), p);
  CHECK(horizon(u) == 6);
}

TEST_CASE("unfold conjunction and windows") {
  Formula p = make_pred(e(2, 0), 1.0), q = make_pred(e(2, 1), 2.0);
  OpTree t = unfold(make_and({p, q}), 0, 3);
  REQUIRE(t.kind == OpTree::Kind::max_node);
  CHECK(t.children.size() == 2);
  CHECK(t.children[0].timestep == 0);

  OpTree a = unfold(make_always(0, 1, p), 0, 3);
  REQUIRE(a.kind == OpTree::Kind::max_node);
  REQUIRE(a.children.size() == 2);
  CHECK(a.children[0].timestep == 0);
  CHECK(a.children[1].timestep == 1);

  OpTree f = unfold(make_eventually(1, 2, p), 0, 3);
  REQUIRE(f.kind == OpTree::Kind::min_node);
  CHECK(f.children[0].timestep == 1);
  CHECK(f.children[1].timestep == 2);
}

TEST_CASE("unfold rejects horizon overflow") {
  Formula p = make_pred(e(2, 0), 1.0);
  CHECK_THROWS_AS(unfold(make_eventually(0, 5, p), 0, 3), HorizonError);
  CHECK_THROWS_AS(unfold(make_and({p, p}), 4, 3), HorizonError);
}

TEST_CASE("unfold until follows the reversed pairing; flag flips it") {
  Formula left = make_pred(e(1, 0), 1.0);
  Formula right = make_pred(e(1, 0, 2.0), 0.5);
  Formula u = make_until(1, 2, left, right);

  // reversed-form pairing: max over t' of min(left@t', min over [t1, t'] right)
  OpTree t = unfold(u, 0, 4, UntilSemantics::paper);
  REQUIRE(t.kind == OpTree::Kind::max_node);
  REQUIRE(t.children.size() == 2);
  REQUIRE(t.children[0].kind == OpTree::Kind::min_node);
  CHECK(t.children[0].children.size() == 2); // left@1, right@1
  CHECK(t.children[1].children.size() == 3); // left@2, right@1, right@2

  OpTree s = unfold(u, 0, 4, UntilSemantics::standard);
  REQUIRE(s.kind == OpTree::Kind::min_node);
  REQUIRE(s.children.size() == 2);
  REQUIRE(s.children[0].kind == OpTree::Kind::max_node);
  CHECK(s.children[0].children.size() == 3); // right@1, left@0, left@1
}

TEST_CASE("fuzz: alternation, idempotent simplify, horizon consistency") {
  std::mt19937_64 rng(2024);
  oracles::FormulaFuzz opts;
  for (int trial = 0; trial < 300; ++trial) {
    Formula f = to_nnf(oracles::random_formula(rng, opts));
    const int h = horizon(f);
    REQUIRE(h <= opts.horizon_budget);
    OpTree t = unfold(f, 0, h);
    CHECK(alternation_ok(t));
    CHECK(simplify(t) == t);
    CHECK(max_leaf_timestep(t) == h);
  }
}

TEST_CASE("fuzz: parse/print round trip is structural identity") {
  std::mt19937_64 rng(99);
  oracles::FormulaFuzz opts;
  opts.dim = 3;
  for (int trial = 0; trial < 200; ++trial) {
    Formula f = oracles::random_formula(rng, opts);
    Formula back = parse(to_string(f), opts.dim);
    CHECK(back == f);
  }
}
