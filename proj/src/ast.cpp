/* SPDX-License-Identifier: Apache-2.0 */
#include "stlsynth/ast.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace stlsynth {

ParseError::ParseError(const std::string &msg, int line_, int col_)
    : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                         std::to_string(col_) + ")"),
      line(line_), col(col_) {}

bool operator==(const LinearPredicate &lhs, const LinearPredicate &rhs) {
  return lhs.b == rhs.b && lhs.a.size() == rhs.a.size() && lhs.a == rhs.a;
}

bool operator==(const Formula &lhs, const Formula &rhs) {
  if (lhs.kind != rhs.kind || lhs.t1 != rhs.t1 || lhs.t2 != rhs.t2) return false;
  if (lhs.kind == Formula::Kind::pred) return lhs.pred == rhs.pred;
  return lhs.children == rhs.children;
}

static void check_interval(int t1, int t2) {
  // t1 == t2 is a single-timestep window; only reversed ordering is invalid.
  if (t1 < 0 || t2 < t1)
    throw std::invalid_argument("invalid temporal interval [" +
                                std::to_string(t1) + "," + std::to_string(t2) + "]");
}

Formula make_pred(Eigen::VectorXd a, double b) {
  if (a.size() == 0 || (a.array() == 0.0).all())
    throw std::invalid_argument("degenerate predicate: zero coefficient vector");
  Formula f;
  f.kind = Formula::Kind::pred;
  f.pred = LinearPredicate{std::move(a), b};
  return f;
}

static Formula make_nary(Formula::Kind kind, std::vector<Formula> children) {
  if (children.size() < 2)
    throw std::invalid_argument("conjunction/disjunction needs >= 2 children");
  Formula f;
  f.kind = kind;
  f.children = std::move(children);
  return f;
}

Formula make_and(std::vector<Formula> children) {
  return make_nary(Formula::Kind::conj, std::move(children));
}

Formula make_or(std::vector<Formula> children) {
  return make_nary(Formula::Kind::disj, std::move(children));
}

static Formula make_temporal(Formula::Kind kind, int t1, int t2, Formula child) {
  check_interval(t1, t2);
  Formula f;
  f.kind = kind;
  f.t1 = t1;
  f.t2 = t2;
  f.children.push_back(std::move(child));
  return f;
}

Formula make_always(int t1, int t2, Formula child) {
  return make_temporal(Formula::Kind::always, t1, t2, std::move(child));
}

Formula make_eventually(int t1, int t2, Formula child) {
  return make_temporal(Formula::Kind::eventually, t1, t2, std::move(child));
}

Formula make_until(int t1, int t2, Formula left, Formula right) {
  check_interval(t1, t2);
  Formula f;
  f.kind = Formula::Kind::until;
  f.t1 = t1;
  f.t2 = t2;
  f.children.push_back(std::move(left));
  f.children.push_back(std::move(right));
  return f;
}

Formula make_not(Formula child) {
  Formula f;
  f.kind = Formula::Kind::neg;
  f.children.push_back(std::move(child));
  return f;
}

bool operator==(const OpTree &lhs, const OpTree &rhs) {
  if (lhs.kind != rhs.kind) return false;
  if (lhs.kind == OpTree::Kind::leaf)
    return lhs.timestep == rhs.timestep && lhs.pred == rhs.pred;
  return lhs.children == rhs.children;
}

OpTree make_leaf(LinearPredicate pred, int timestep) {
  if (timestep < 0) throw std::invalid_argument("negative leaf timestep");
  OpTree t;
  t.kind = OpTree::Kind::leaf;
  t.pred = std::move(pred);
  t.timestep = timestep;
  return t;
}

static OpTree make_node(OpTree::Kind kind, std::vector<OpTree> children) {
  if (children.empty()) throw std::invalid_argument("empty operator node");
  OpTree t;
  t.kind = kind;
  t.children = std::move(children);
  return t;
}

OpTree make_max(std::vector<OpTree> children) {
  return make_node(OpTree::Kind::max_node, std::move(children));
}

OpTree make_min(std::vector<OpTree> children) {
  return make_node(OpTree::Kind::min_node, std::move(children));
}

// ---------------------------------------------------------------------------
// Region sugar

static Eigen::VectorXd axis(int dim, int i, double sign) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
  a[i] = sign;
  return a;
}

Formula box_membership(const Box &box, int dim) {
  if (dim < 2) throw std::invalid_argument("box regions need >= 2 signals");
  std::vector<Formula> halves;
  halves.push_back(make_pred(axis(dim, 0, -1.0), -box.x_lo)); // x >= x_lo
  halves.push_back(make_pred(axis(dim, 0, 1.0), box.x_hi));   // x <= x_hi
  halves.push_back(make_pred(axis(dim, 1, -1.0), -box.y_lo)); // y >= y_lo
  halves.push_back(make_pred(axis(dim, 1, 1.0), box.y_hi));   // y <= y_hi
  return make_and(std::move(halves));
}

Formula box_avoidance(const Box &box, int dim) {
  if (dim < 2) throw std::invalid_argument("box regions need >= 2 signals");
  std::vector<Formula> halves;
  halves.push_back(make_pred(axis(dim, 0, 1.0), box.x_lo));   // x <= x_lo
  halves.push_back(make_pred(axis(dim, 0, -1.0), -box.x_hi)); // x >= x_hi
  halves.push_back(make_pred(axis(dim, 1, 1.0), box.y_lo));   // y <= y_lo
  halves.push_back(make_pred(axis(dim, 1, -1.0), -box.y_hi)); // y >= y_hi
  return make_or(std::move(halves));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { ident, number, lparen, rparen, lbrack, rbrack, comma, star,
                 plus, minus, bang, amp, pipe, le, ge, end };

struct Token {
  Tok kind;
  std::string text;
  double num = 0.0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string &src) : src_(src) {}

  Token next() {
    skip_ws();
    Token tok;
    tok.line = line_;
    tok.col = col_;
    if (pos_ >= src_.size()) {
      tok.kind = Tok::end;
      return tok;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      tok.num = std::stod(src_.substr(pos_), &used);
      tok.text = src_.substr(pos_, used);
      advance(used);
      tok.kind = Tok::number;
      return tok;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      tok.text = src_.substr(pos_, end - pos_);
      advance(end - pos_);
      tok.kind = Tok::ident;
      return tok;
    }
    switch (c) {
      case '(': tok.kind = Tok::lparen; break;
      case ')': tok.kind = Tok::rparen; break;
      case '[': tok.kind = Tok::lbrack; break;
      case ']': tok.kind = Tok::rbrack; break;
      case ',': tok.kind = Tok::comma; break;
      case '*': tok.kind = Tok::star; break;
      case '+': tok.kind = Tok::plus; break;
      case '-': tok.kind = Tok::minus; break;
      case '!': tok.kind = Tok::bang; break;
      case '&': tok.kind = Tok::amp; break;
      case '|': tok.kind = Tok::pipe; break;
      case '<':
      case '>':
        if (pos_ + 1 >= src_.size() || src_[pos_ + 1] != '=')
          throw ParseError("strict comparisons are not part of the grammar", line_, col_);
        tok.kind = (c == '<') ? Tok::le : Tok::ge;
        advance(1);
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }
    advance(1);
    return tok;
  }

private:
  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void advance(size_t n) {
    for (size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  const std::string &src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
public:
  Parser(const std::string &src, int dim, const RegionTable &regions)
      : lexer_(src), dim_(dim), regions_(regions) {
    if (dim_ <= 0) throw std::invalid_argument("signal dimension must be positive");
    cur_ = lexer_.next();
  }

  Formula run() {
    Formula f = parse_or();
    expect(Tok::end, "trailing input after formula");
    return f;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(msg, cur_.line, cur_.col);
  }

  void bump() { cur_ = lexer_.next(); }

  bool accept(Tok k) {
    if (cur_.kind != k) return false;
    bump();
    return true;
  }

  void expect(Tok k, const char *msg) {
    if (cur_.kind != k) fail(msg);
    bump();
  }

  bool ident_is(const char *s) const {
    return cur_.kind == Tok::ident && cur_.text == s;
  }

  Formula parse_or() {
    std::vector<Formula> parts;
    parts.push_back(parse_and());
    while (accept(Tok::pipe)) parts.push_back(parse_and());
    return parts.size() == 1 ? std::move(parts.front()) : make_or(std::move(parts));
  }

  Formula parse_and() {
    std::vector<Formula> parts;
    parts.push_back(parse_until());
    while (accept(Tok::amp)) parts.push_back(parse_until());
    return parts.size() == 1 ? std::move(parts.front()) : make_and(std::move(parts));
  }

  Formula parse_until() {
    Formula left = parse_prefix();
    if (ident_is("U")) {
      bump();
      auto [t1, t2] = parse_interval();
      Formula right = parse_until(); // right associative
      return make_until(t1, t2, std::move(left), std::move(right));
    }
    return left;
  }

  Formula parse_prefix() {
    if (cur_.kind == Tok::bang) {
      bump();
      if (ident_is("in")) { // "!in REGION": expanded at parse time
        bump();
        return box_avoidance(parse_region(), dim_);
      }
      return make_not(parse_prefix());
    }
    if (ident_is("G") || ident_is("F")) {
      bool always = cur_.text == "G";
      bump();
      auto [t1, t2] = parse_interval();
      Formula child = parse_prefix();
      return always ? make_always(t1, t2, std::move(child))
                    : make_eventually(t1, t2, std::move(child));
    }
    return parse_primary();
  }

  Formula parse_primary() {
    if (accept(Tok::lparen)) {
      Formula f = parse_or();
      expect(Tok::rparen, "expected ')'");
      return f;
    }
    if (ident_is("in")) {
      bump();
      return box_membership(parse_region(), dim_);
    }
    return parse_pred();
  }

  std::pair<int, int> parse_interval() {
    int line = cur_.line, col = cur_.col;
    expect(Tok::lbrack, "expected '['");
    int t1 = parse_int();
    expect(Tok::comma, "expected ','");
    int t2 = parse_int();
    expect(Tok::rbrack, "expected ']'");
    // The DSL keeps the strict bound ordering; single-timestep windows are
    // only constructible programmatically.
    if (t1 >= t2)
      throw ParseError("interval requires t1 < t2", line, col);
    if (t1 < 0) throw ParseError("interval bounds must be non-negative", line, col);
    return {t1, t2};
  }

  int parse_int() {
    if (cur_.kind != Tok::number) fail("expected integer");
    double v = cur_.num;
    if (v != std::floor(v)) fail("interval bounds must be integers");
    bump();
    return static_cast<int>(v);
  }

  double parse_number() {
    double sign = 1.0;
    if (accept(Tok::minus)) sign = -1.0;
    else accept(Tok::plus);
    if (cur_.kind != Tok::number) fail("expected number");
    double v = cur_.num;
    bump();
    return sign * v;
  }

  Box parse_region() {
    if (cur_.kind != Tok::ident) fail("expected region name or BOX(...)");
    if (cur_.text == "BOX") {
      bump();
      expect(Tok::lparen, "expected '(' after BOX");
      Box box;
      box.x_lo = parse_number();
      expect(Tok::comma, "expected ','");
      box.x_hi = parse_number();
      expect(Tok::comma, "expected ','");
      box.y_lo = parse_number();
      expect(Tok::comma, "expected ','");
      box.y_hi = parse_number();
      expect(Tok::rparen, "expected ')'");
      if (box.x_lo > box.x_hi || box.y_lo > box.y_hi)
        fail("box lower bound exceeds upper bound");
      return box;
    }
    auto it = regions_.find(cur_.text);
    if (it == regions_.end()) fail("unknown region '" + cur_.text + "'");
    bump();
    return it->second;
  }

  // Affine expression as (coefficients, constant).
  struct LinExpr {
    Eigen::VectorXd a;
    double c = 0.0;
  };

  int parse_signal_index() {
    const std::string &name = cur_.text;
    if (name.size() < 2 || name[0] != 'x' ||
        !std::all_of(name.begin() + 1, name.end(),
                     [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
      fail("unknown signal name '" + name + "'");
    int idx = std::atoi(name.c_str() + 1);
    if (idx >= dim_)
      fail("signal '" + name + "' out of range for dimension " + std::to_string(dim_));
    bump();
    return idx;
  }

  LinExpr parse_linexpr() {
    LinExpr e;
    e.a = Eigen::VectorXd::Zero(dim_);
    double sign = 1.0;
    if (accept(Tok::minus)) sign = -1.0;
    else accept(Tok::plus);
    parse_term(e, sign);
    for (;;) {
      if (accept(Tok::plus)) parse_term(e, 1.0);
      else if (accept(Tok::minus)) parse_term(e, -1.0);
      else break;
    }
    return e;
  }

  void parse_term(LinExpr &e, double sign) {
    if (cur_.kind == Tok::number) {
      double coeff = cur_.num;
      bump();
      if (accept(Tok::star)) {
        int idx = parse_signal_index();
        e.a[idx] += sign * coeff;
      } else {
        e.c += sign * coeff;
      }
      return;
    }
    if (cur_.kind == Tok::ident) {
      int idx = parse_signal_index();
      e.a[idx] += sign;
      return;
    }
    fail("expected term");
  }

  Formula parse_pred() {
    int line = cur_.line, col = cur_.col;
    LinExpr lhs = parse_linexpr();
    bool flip;
    if (accept(Tok::le)) flip = false;
    else if (accept(Tok::ge)) flip = true;
    else fail("expected '<=' or '>=' in predicate");
    LinExpr rhs = parse_linexpr();
    Eigen::VectorXd a = lhs.a - rhs.a;
    double b = rhs.c - lhs.c;
    if (flip) {
      a = -a;
      b = -b;
    }
    if ((a.array() == 0.0).all())
      throw ParseError("degenerate predicate: no signal appears", line, col);
    return make_pred(std::move(a), b);
  }

  Lexer lexer_;
  Token cur_;
  int dim_;
  const RegionTable &regions_;
};

} // namespace

Formula parse(const std::string &text, int dim, const RegionTable &regions) {
  return Parser(text, dim, regions).run();
}

// ---------------------------------------------------------------------------
// Printer

static std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

static void print_pred(std::ostringstream &out, const LinearPredicate &p) {
  bool first = true;
  for (Eigen::Index i = 0; i < p.a.size(); ++i) {
    double c = p.a[i];
    if (c == 0.0) continue;
    if (first) {
      if (c < 0) out << "-";
      first = false;
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    out << fmt_num(std::abs(c)) << "*x" << i;
  }
  out << " <= " << fmt_num(p.b);
}

static void print_formula(std::ostringstream &out, const Formula &f) {
  auto child_in_parens = [&](const Formula &c) {
    out << "(";
    print_formula(out, c);
    out << ")";
  };
  switch (f.kind) {
    case Formula::Kind::pred:
      print_pred(out, f.pred);
      break;
    case Formula::Kind::conj:
    case Formula::Kind::disj: {
      const char *sep = f.kind == Formula::Kind::conj ? " & " : " | ";
      for (size_t i = 0; i < f.children.size(); ++i) {
        if (i) out << sep;
        child_in_parens(f.children[i]);
      }
      break;
    }
    case Formula::Kind::always:
    case Formula::Kind::eventually:
      out << (f.kind == Formula::Kind::always ? "G" : "F") << "[" << f.t1 << ","
          << f.t2 << "] ";
      child_in_parens(f.children[0]);
      break;
    case Formula::Kind::until:
      child_in_parens(f.children[0]);
      out << " U[" << f.t1 << "," << f.t2 << "] ";
      child_in_parens(f.children[1]);
      break;
    case Formula::Kind::neg:
      out << "! ";
      child_in_parens(f.children[0]);
      break;
  }
}

std::string to_string(const Formula &f) {
  std::ostringstream out;
  print_formula(out, f);
  return out.str();
}

// ---------------------------------------------------------------------------
// Negation normal form

static Formula negate_nnf(const Formula &f);

Formula to_nnf(const Formula &f) {
  switch (f.kind) {
    case Formula::Kind::pred:
      return f;
    case Formula::Kind::neg:
      return negate_nnf(f.children[0]);
    case Formula::Kind::conj:
    case Formula::Kind::disj:
    case Formula::Kind::always:
    case Formula::Kind::eventually:
    case Formula::Kind::until: {
      Formula out = f;
      for (auto &c : out.children) c = to_nnf(c);
      return out;
    }
  }
  throw std::logic_error("unreachable formula kind");
}

static Formula negate_nnf(const Formula &f) {
  switch (f.kind) {
    case Formula::Kind::pred:
      // not(a'x <= b) kept closed: -a'x <= -b
      return make_pred(-f.pred.a, -f.pred.b);
    case Formula::Kind::neg:
      return to_nnf(f.children[0]);
    case Formula::Kind::conj:
    case Formula::Kind::disj: {
      std::vector<Formula> flipped;
      flipped.reserve(f.children.size());
      for (const auto &c : f.children) flipped.push_back(negate_nnf(c));
      return f.kind == Formula::Kind::conj ? make_or(std::move(flipped))
                                           : make_and(std::move(flipped));
    }
    case Formula::Kind::always:
      return make_eventually(f.t1, f.t2, negate_nnf(f.children[0]));
    case Formula::Kind::eventually:
      return make_always(f.t1, f.t2, negate_nnf(f.children[0]));
    case Formula::Kind::until:
      throw UnsupportedError("negated until is outside the negation-free fragment");
  }
  throw std::logic_error("unreachable formula kind");
}

bool is_nnf(const Formula &f) {
  if (f.kind == Formula::Kind::neg) return false;
  return std::all_of(f.children.begin(), f.children.end(),
                     [](const Formula &c) { return is_nnf(c); });
}

// ---------------------------------------------------------------------------
// Horizon and unfolding

int horizon(const Formula &f) {
  switch (f.kind) {
    case Formula::Kind::pred:
      return 0;
    case Formula::Kind::neg:
      return horizon(f.children[0]);
    case Formula::Kind::conj:
    case Formula::Kind::disj: {
      int h = 0;
      for (const auto &c : f.children) h = std::max(h, horizon(c));
      return h;
    }
    case Formula::Kind::always:
    case Formula::Kind::eventually:
      return f.t2 + horizon(f.children[0]);
    case Formula::Kind::until:
      return f.t2 + std::max(horizon(f.children[0]), horizon(f.children[1]));
  }
  throw std::logic_error("unreachable formula kind");
}

static OpTree unfold_raw(const Formula &f, int t, int T, UntilSemantics sem) {
  switch (f.kind) {
    case Formula::Kind::pred:
      if (t > T)
        throw HorizonError("leaf timestep " + std::to_string(t) +
                           " exceeds trajectory horizon " + std::to_string(T));
      return make_leaf(f.pred, t);
    case Formula::Kind::conj:
    case Formula::Kind::disj: {
      std::vector<OpTree> kids;
      kids.reserve(f.children.size());
      for (const auto &c : f.children) kids.push_back(unfold_raw(c, t, T, sem));
      return f.kind == Formula::Kind::conj ? make_max(std::move(kids))
                                           : make_min(std::move(kids));
    }
    case Formula::Kind::always:
    case Formula::Kind::eventually: {
      std::vector<OpTree> kids;
      for (int tp = t + f.t1; tp <= t + f.t2; ++tp)
        kids.push_back(unfold_raw(f.children[0], tp, T, sem));
      return f.kind == Formula::Kind::always ? make_max(std::move(kids))
                                             : make_min(std::move(kids));
    }
    case Formula::Kind::until: {
      const Formula &left = f.children[0];
      const Formula &right = f.children[1];
      std::vector<OpTree> outer;
      for (int tp = t + f.t1; tp <= t + f.t2; ++tp) {
        if (sem == UntilSemantics::paper) {
          std::vector<OpTree> inner;
          for (int ts = t + f.t1; ts <= tp; ++ts)
            inner.push_back(unfold_raw(right, ts, T, sem));
          outer.push_back(make_min(
              {unfold_raw(left, tp, T, sem), make_min(std::move(inner))}));
        } else {
          std::vector<OpTree> inner;
          for (int ts = t; ts <= tp; ++ts)
            inner.push_back(unfold_raw(left, ts, T, sem));
          outer.push_back(make_max(
              {unfold_raw(right, tp, T, sem), make_max(std::move(inner))}));
        }
      }
      return sem == UntilSemantics::paper ? make_max(std::move(outer))
                                          : make_min(std::move(outer));
    }
    case Formula::Kind::neg:
      throw std::invalid_argument("unfold requires a formula in negation normal form");
  }
  throw std::logic_error("unreachable formula kind");
}

OpTree unfold(const Formula &f, int t, int T, UntilSemantics sem) {
  if (t < 0) throw std::invalid_argument("anchor timestep must be non-negative");
  return simplify(unfold_raw(f, t, T, sem));
}

OpTree simplify(const OpTree &t) {
  if (t.kind == OpTree::Kind::leaf) return t;
  std::vector<OpTree> kids;
  kids.reserve(t.children.size());
  for (const auto &c : t.children) {
    OpTree sc = simplify(c);
    if (sc.kind == t.kind) {
      for (auto &grand : sc.children) kids.push_back(std::move(grand));
    } else {
      kids.push_back(std::move(sc));
    }
  }
  if (kids.size() == 1) return std::move(kids.front());
  OpTree out;
  out.kind = t.kind;
  out.children = std::move(kids);
  return out;
}

bool alternation_ok(const OpTree &t) {
  if (t.kind == OpTree::Kind::leaf) return true;
  if (t.children.size() < 2) return false;
  for (const auto &c : t.children) {
    if (c.kind == t.kind) return false;
    if (!alternation_ok(c)) return false;
  }
  return true;
}

int max_leaf_timestep(const OpTree &t) {
  if (t.kind == OpTree::Kind::leaf) return t.timestep;
  int m = 0;
  for (const auto &c : t.children) m = std::max(m, max_leaf_timestep(c));
  return m;
}

int min_depth(const OpTree &t) {
  if (t.kind == OpTree::Kind::leaf) return 0;
  int below = 0;
  for (const auto &c : t.children) below = std::max(below, min_depth(c));
  return below + (t.kind == OpTree::Kind::min_node ? 1 : 0);
}

int max_min_fanin(const OpTree &t) {
  if (t.kind == OpTree::Kind::leaf) return 0;
  int m = t.kind == OpTree::Kind::min_node ? static_cast<int>(t.children.size()) : 0;
  for (const auto &c : t.children) m = std::max(m, max_min_fanin(c));
  return m;
}

} // namespace stlsynth
