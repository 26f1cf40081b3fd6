#pragma once
// Tiny arithmetic DSL for defining p(x), w(x), rho(x), V(x) in run configs.
//
// Grammar (whitespace-insensitive, byte offsets reported on errors):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' primary)*              left-associative
//   primary := number | 'x1' | 'x2' | 'x3' | 'norm2' '(' 'x' ')'
//            | ('abs'|'exp'|'log'|'sqrt') '(' expr ')' | '(' expr ')'
// Precedence: '^' over unary minus over '*' '/' over '+' '-', so -x1^2 is
// -(x1^2).  The exponent operand of '^' is a primary; write parentheses for
// anything else.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "varlux/errors.hpp"
#include "varlux/grid.hpp"

namespace varlux {

enum class ExprKind {
  constant, variable, norm2,        // leaves (variable: index 1..3)
  neg, abs_fn, exp_fn, log_fn, sqrt_fn,
  add, sub, mul, div, pow
};

struct ExprNode {
  ExprKind kind;
  double value = 0.0;  // constant
  int var = 0;         // variable index, 1-based
  std::unique_ptr<ExprNode> lhs, rhs;
};

inline std::unique_ptr<ExprNode> clone_node(const ExprNode& n) {
  auto c = std::make_unique<ExprNode>();
  c->kind = n.kind;
  c->value = n.value;
  c->var = n.var;
  if (n.lhs) c->lhs = clone_node(*n.lhs);
  if (n.rhs) c->rhs = clone_node(*n.rhs);
  return c;
}

struct Expr {
  std::unique_ptr<ExprNode> root;

  Expr() = default;
  explicit Expr(std::unique_ptr<ExprNode> r) : root(std::move(r)) {}
  Expr(const Expr& o) : root(o.root ? clone_node(*o.root) : nullptr) {}
  Expr& operator=(const Expr& o) {
    if (this != &o) root = o.root ? clone_node(*o.root) : nullptr;
    return *this;
  }
  Expr(Expr&&) = default;
  Expr& operator=(Expr&&) = default;
};

namespace detail {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;

  [[noreturn]] void fail(std::size_t at, const std::string& what) {
    throw invalid_input("parse: syntax-error at offset " + std::to_string(at) + ": " + what);
  }
  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* ctx) {
    skip_ws();
    if (pos >= src.size() || src[pos] != c)
      fail(pos, std::string("expected '") + c + "' " + ctx);
    ++pos;
  }

  static std::unique_ptr<ExprNode> leaf(ExprKind k) {
    auto n = std::make_unique<ExprNode>();
    n->kind = k;
    return n;
  }
  static std::unique_ptr<ExprNode> unary(ExprKind k, std::unique_ptr<ExprNode> a) {
    auto n = leaf(k);
    n->lhs = std::move(a);
    return n;
  }
  static std::unique_ptr<ExprNode> binary(ExprKind k, std::unique_ptr<ExprNode> a,
                                          std::unique_ptr<ExprNode> b) {
    auto n = leaf(k);
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  std::unique_ptr<ExprNode> parse_expr() {
    auto node = parse_term();
    while (true) {
      if (accept('+')) node = binary(ExprKind::add, std::move(node), parse_term());
      else if (accept('-')) node = binary(ExprKind::sub, std::move(node), parse_term());
      else return node;
    }
  }
  std::unique_ptr<ExprNode> parse_term() {
    auto node = parse_unary();
    while (true) {
      if (accept('*')) node = binary(ExprKind::mul, std::move(node), parse_unary());
      else if (accept('/')) node = binary(ExprKind::div, std::move(node), parse_unary());
      else return node;
    }
  }
  std::unique_ptr<ExprNode> parse_unary() {
    if (accept('-')) return unary(ExprKind::neg, parse_unary());
    return parse_power();
  }
  std::unique_ptr<ExprNode> parse_power() {
    auto node = parse_primary();
    while (accept('^')) node = binary(ExprKind::pow, std::move(node), parse_primary());
    return node;
  }

  std::unique_ptr<ExprNode> parse_primary() {
    skip_ws();
    if (pos >= src.size()) fail(pos, "unexpected end of input");
    const char c = src[pos];
    if (c == '(') {
      ++pos;
      auto inner = parse_expr();
      expect(')', "to close '('");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(pos, std::string("unexpected character '") + c + "'");
  }

  std::unique_ptr<ExprNode> parse_number() {
    const std::size_t start = pos;
    double v = 0.0;
    const char* first = src.data() + pos;
    const char* last = src.data() + src.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) fail(start, "malformed number");
    pos += static_cast<std::size_t>(ptr - first);
    auto n = leaf(ExprKind::constant);
    n->value = v;
    return n;
  }

  std::unique_ptr<ExprNode> parse_ident() {
    const std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    const std::string_view name = src.substr(start, pos - start);
    if (name == "x1" || name == "x2" || name == "x3") {
      auto n = leaf(ExprKind::variable);
      n->var = name[1] - '0';
      return n;
    }
    if (name == "norm2") {
      expect('(', "after norm2");
      skip_ws();
      const std::size_t arg = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      if (src.substr(arg, pos - arg) != "x")
        fail(arg, "norm2 takes the bare point argument x");
      expect(')', "to close norm2(");
      return leaf(ExprKind::norm2);
    }
    ExprKind k;
    if (name == "abs") k = ExprKind::abs_fn;
    else if (name == "exp") k = ExprKind::exp_fn;
    else if (name == "log") k = ExprKind::log_fn;
    else if (name == "sqrt") k = ExprKind::sqrt_fn;
    else
      throw invalid_input("parse: unknown-identifier '" + std::string(name) + "' at offset " +
                          std::to_string(start));
    expect('(', "after function name");
    auto arg = parse_expr();
    expect(')', "to close function call");
    return unary(k, std::move(arg));
  }
};

inline void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprKind::constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case ExprKind::variable: out += 'x'; out += static_cast<char>('0' + n.var); return;
    case ExprKind::norm2: out += "norm2(x)"; return;
    case ExprKind::neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case ExprKind::abs_fn:
    case ExprKind::exp_fn:
    case ExprKind::log_fn:
    case ExprKind::sqrt_fn: {
      out += (n.kind == ExprKind::abs_fn    ? "abs("
              : n.kind == ExprKind::exp_fn  ? "exp("
              : n.kind == ExprKind::log_fn  ? "log("
                                            : "sqrt(");
      print_node(*n.lhs, out);
      out += ')';
      return;
    }
    default: {
      const char op = n.kind == ExprKind::add   ? '+'
                      : n.kind == ExprKind::sub ? '-'
                      : n.kind == ExprKind::mul ? '*'
                      : n.kind == ExprKind::div ? '/'
                                                : '^';
      out += '(';
      print_node(*n.lhs, out);
      out += op;
      print_node(*n.rhs, out);
      out += ')';
      return;
    }
  }
}

inline double eval_node(const ExprNode& n, const Point& p, int dim) {
  switch (n.kind) {
    case ExprKind::constant: return n.value;
    case ExprKind::variable:
      if (n.var > dim)
        throw invalid_input("evaluate: variable x" + std::to_string(n.var) +
                            " exceeds domain dimension " + std::to_string(dim));
      return p[n.var - 1];
    case ExprKind::norm2: {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += p[k] * p[k];
      return std::sqrt(s);
    }
    case ExprKind::neg: return -eval_node(*n.lhs, p, dim);
    case ExprKind::abs_fn: return std::abs(eval_node(*n.lhs, p, dim));
    case ExprKind::exp_fn: return std::exp(eval_node(*n.lhs, p, dim));
    case ExprKind::log_fn: {
      const double a = eval_node(*n.lhs, p, dim);
      if (a < 0.0) throw numeric_error("evaluate: evaluation-domain (log of negative value)");
      return std::log(a);
    }
    case ExprKind::sqrt_fn: {
      const double a = eval_node(*n.lhs, p, dim);
      if (a < 0.0) throw numeric_error("evaluate: evaluation-domain (sqrt of negative value)");
      return std::sqrt(a);
    }
    case ExprKind::add: return eval_node(*n.lhs, p, dim) + eval_node(*n.rhs, p, dim);
    case ExprKind::sub: return eval_node(*n.lhs, p, dim) - eval_node(*n.rhs, p, dim);
    case ExprKind::mul: return eval_node(*n.lhs, p, dim) * eval_node(*n.rhs, p, dim);
    case ExprKind::div: return eval_node(*n.lhs, p, dim) / eval_node(*n.rhs, p, dim);
    case ExprKind::pow: {
      const double a = eval_node(*n.lhs, p, dim);
      const double b = eval_node(*n.rhs, p, dim);
      if (a < 0.0 && b != std::floor(b))
        throw numeric_error(
            "evaluate: evaluation-domain (negative base with non-integer exponent)");
      return std::pow(a, b);
    }
  }
  throw numeric_error("evaluate: corrupt expression node");
}

inline bool equal_nodes(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::constant: return a.value == b.value;
    case ExprKind::variable: return a.var == b.var;
    case ExprKind::norm2: return true;
    default:
      if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
      if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
      if (a.lhs && !equal_nodes(*a.lhs, *b.lhs)) return false;
      if (a.rhs && !equal_nodes(*a.rhs, *b.rhs)) return false;
      return true;
  }
}

}  // namespace detail

inline Expr parse(std::string_view text) {
  detail::Parser p{text};
  auto root = p.parse_expr();
  if (!p.at_end()) p.fail(p.pos, "trailing input");
  return Expr{std::move(root)};
}

inline std::string print(const Expr& e) {
  std::string out;
  detail::print_node(*e.root, out);
  return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  return detail::equal_nodes(*a.root, *b.root);
}

inline double evaluate(const Expr& e, const Point& p, int dim) {
  const double v = detail::eval_node(*e.root, p, dim);
  if (!std::isfinite(v)) throw numeric_error("evaluate: non-finite result");
  return v;
}

// Evaluates at every cell center; failures are rethrown with the flat cell
// index attached.
inline GridFunction sample(const Expr& e, const Domain& d) {
  GridFunction g;
  g.domain = d;
  g.values.resize(d.cell_count());
  bool nonneg = true;
  for (Index i = 0; i < d.cell_count(); ++i) {
    try {
      g.values[i] = evaluate(e, d.cell_center(i), d.dim);
    } catch (const invalid_input& err) {
      throw invalid_input(std::string(err.what()) + " (at cell " + std::to_string(i) + ")");
    } catch (const error& err) {
      throw numeric_error(std::string(err.what()) + " (at cell " + std::to_string(i) + ")");
    }
    if (g.values[i] < 0.0) nonneg = false;
  }
  g.nonneg = nonneg;
  return g;
}

}  // namespace varlux
