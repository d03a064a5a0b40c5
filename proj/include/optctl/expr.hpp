#pragma once

/**
 * @file
 * @brief Immutable symbolic expression trees.
 *
 * An Expr is a shared, immutable tree of constants, named variables, unary
 * functions (neg, sin, cos, exp) and binary arithmetic (+, -, *, /, ^).
 * Builders fold constant subtrees and a small set of identities, so trees
 * produced by the parser, by differentiate() and by substitute() are always
 * in the same folded form and structural equality is meaningful.
 */

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "optctl/errors.hpp"

namespace optctl {

enum class UnaryOp { Neg, Sin, Cos, Exp };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

class Expr {
 public:
  struct Constant;
  struct Variable;
  struct Unary;
  struct Binary;
  struct Node;

  /// Defaults to the constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::string name);

  /// Builders without folding; used to test fold soundness and by the parser
  /// when folding is disabled.
  static Expr raw_unary(UnaryOp op, Expr child);
  static Expr raw_binary(BinaryOp op, Expr lhs, Expr rhs);

  const Node& node() const { return *node_; }

  bool is_constant() const;
  bool is_constant(double value) const;
  bool is_variable() const;
  /// Value of a Constant node. Precondition: is_constant().
  double value() const;
  /// Name of a Variable node. Precondition: is_variable().
  const std::string& name() const;

  const Constant* as_constant() const;
  const Variable* as_variable() const;
  const Unary* as_unary() const;
  const Binary* as_binary() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Constant {
  double value;
};
struct Expr::Variable {
  std::string name;
};
struct Expr::Unary {
  UnaryOp op;
  Expr child;
};
struct Expr::Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct Expr::Node {
  std::variant<Constant, Variable, Unary, Binary> data;
};

inline Expr::Expr() : node_(std::make_shared<const Node>(Node{Constant{0.0}})) {}

inline Expr Expr::constant(double value) {
  return Expr(std::make_shared<const Node>(Node{Constant{value}}));
}

inline Expr Expr::variable(std::string name) {
  return Expr(std::make_shared<const Node>(Node{Variable{std::move(name)}}));
}

inline Expr Expr::raw_unary(UnaryOp op, Expr child) {
  return Expr(std::make_shared<const Node>(Node{Unary{op, std::move(child)}}));
}

inline Expr Expr::raw_binary(BinaryOp op, Expr lhs, Expr rhs) {
  if (op == BinaryOp::Pow && !rhs.is_constant()) {
    throw Error("exponent of '^' must be a constant");
  }
  return Expr(std::make_shared<const Node>(Node{Binary{op, std::move(lhs), std::move(rhs)}}));
}

inline const Expr::Constant* Expr::as_constant() const { return std::get_if<Constant>(&node_->data); }
inline const Expr::Variable* Expr::as_variable() const { return std::get_if<Variable>(&node_->data); }
inline const Expr::Unary* Expr::as_unary() const { return std::get_if<Unary>(&node_->data); }
inline const Expr::Binary* Expr::as_binary() const { return std::get_if<Binary>(&node_->data); }

inline bool Expr::is_constant() const { return as_constant() != nullptr; }
inline bool Expr::is_constant(double v) const {
  const auto* c = as_constant();
  return c != nullptr && c->value == v;
}
inline bool Expr::is_variable() const { return as_variable() != nullptr; }
inline double Expr::value() const { return as_constant()->value; }
inline const std::string& Expr::name() const { return as_variable()->name; }

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& na = a.node_->data;
  const auto& nb = b.node_->data;
  if (na.index() != nb.index()) return false;
  if (const auto* c = std::get_if<Expr::Constant>(&na)) {
    // Bitwise-style comparison: -0 and 0 differ, NaN equals NaN.
    const double x = c->value;
    const double y = std::get<Expr::Constant>(nb).value;
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
    return x == y && std::signbit(x) == std::signbit(y);
  }
  if (const auto* v = std::get_if<Expr::Variable>(&na)) {
    return v->name == std::get<Expr::Variable>(nb).name;
  }
  if (const auto* u = std::get_if<Expr::Unary>(&na)) {
    const auto& w = std::get<Expr::Unary>(nb);
    return u->op == w.op && u->child == w.child;
  }
  const auto& p = std::get<Expr::Binary>(na);
  const auto& q = std::get<Expr::Binary>(nb);
  return p.op == q.op && p.lhs == q.lhs && p.rhs == q.rhs;
}

// ---------------------------------------------------------------------------
// Folding builders

namespace detail {

inline double apply(UnaryOp op, double x) {
  switch (op) {
    case UnaryOp::Neg: return -x;
    case UnaryOp::Sin: return std::sin(x);
    case UnaryOp::Cos: return std::cos(x);
    case UnaryOp::Exp: return std::exp(x);
  }
  return x;
}

inline double apply(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
  }
  return a;
}

}  // namespace detail

/// Unary node with folding: f(constant) -> constant, -(-x) -> x.
inline Expr make_unary(UnaryOp op, const Expr& child) {
  if (child.is_constant()) return Expr::constant(detail::apply(op, child.value()));
  if (op == UnaryOp::Neg) {
    if (const auto* u = child.as_unary(); u != nullptr && u->op == UnaryOp::Neg) return u->child;
  }
  return Expr::raw_unary(op, child);
}

/// Binary node with folding. Rules: constant arithmetic, x+0, 0+x, x-0,
/// 0-x -> -x, x*1, 1*x, x*0, 0*x, c1*(c2*x) -> (c1*c2)*x, x/1, x^1, x^0.
inline Expr make_binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
  if (lhs.is_constant() && rhs.is_constant()) {
    return Expr::constant(detail::apply(op, lhs.value(), rhs.value()));
  }
  switch (op) {
    case BinaryOp::Add:
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return rhs;
      break;
    case BinaryOp::Sub:
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return make_unary(UnaryOp::Neg, rhs);
      break;
    case BinaryOp::Mul:
      if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) return Expr::constant(0.0);
      if (lhs.is_constant(1.0)) return rhs;
      if (rhs.is_constant(1.0)) return lhs;
      if (lhs.is_constant()) {
        if (const auto* b = rhs.as_binary(); b != nullptr && b->op == BinaryOp::Mul && b->lhs.is_constant()) {
          return make_binary(BinaryOp::Mul, Expr::constant(lhs.value() * b->lhs.value()), b->rhs);
        }
      }
      break;
    case BinaryOp::Div:
      if (rhs.is_constant(1.0)) return lhs;
      break;
    case BinaryOp::Pow:
      if (rhs.is_constant(1.0)) return lhs;
      if (rhs.is_constant(0.0)) return Expr::constant(1.0);
      break;
  }
  return Expr::raw_binary(op, lhs, rhs);
}

inline Expr operator+(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return make_binary(BinaryOp::Div, a, b); }
inline Expr operator-(const Expr& a) { return make_unary(UnaryOp::Neg, a); }
inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr pow(const Expr& base, double exponent) {
  return make_binary(BinaryOp::Pow, base, Expr::constant(exponent));
}
inline Expr sin(const Expr& a) { return make_unary(UnaryOp::Sin, a); }
inline Expr cos(const Expr& a) { return make_unary(UnaryOp::Cos, a); }
inline Expr exp(const Expr& a) { return make_unary(UnaryOp::Exp, a); }

/// Rebuilds `e` bottom-up through the folding builders.
inline Expr fold(const Expr& e) {
  if (const auto* u = e.as_unary()) return make_unary(u->op, fold(u->child));
  if (const auto* b = e.as_binary()) return make_binary(b->op, fold(b->lhs), fold(b->rhs));
  return e;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

/// Shortest text that reads back to exactly the same double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow, 5 atom.
inline int precedence(const Expr& e) {
  if (const auto* c = e.as_constant()) return std::signbit(c->value) ? 3 : 5;
  if (e.is_variable()) return 5;
  if (const auto* u = e.as_unary()) return u->op == UnaryOp::Neg ? 3 : 5;
  switch (e.as_binary()->op) {
    case BinaryOp::Add:
    case BinaryOp::Sub: return 1;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 2;
    case BinaryOp::Pow: return 4;
  }
  return 5;
}

inline void print(const Expr& e, int min_prec, std::string& out);

inline void print_operand(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, 0, out);
    out += ')';
  } else {
    print(e, min_prec, out);
  }
}

inline void print(const Expr& e, int /*min_prec*/, std::string& out) {
  if (const auto* c = e.as_constant()) {
    out += format_real(c->value);
    return;
  }
  if (const auto* v = e.as_variable()) {
    out += v->name;
    return;
  }
  if (const auto* u = e.as_unary()) {
    switch (u->op) {
      case UnaryOp::Neg:
        out += '-';
        print_operand(u->child, 3, out);
        return;
      case UnaryOp::Sin: out += "sin("; break;
      case UnaryOp::Cos: out += "cos("; break;
      case UnaryOp::Exp: out += "exp("; break;
    }
    print(u->child, 0, out);
    out += ')';
    return;
  }
  const auto& b = *e.as_binary();
  switch (b.op) {
    case BinaryOp::Add:
    case BinaryOp::Sub:
      print_operand(b.lhs, 1, out);
      out += b.op == BinaryOp::Add ? " + " : " - ";
      print_operand(b.rhs, 2, out);
      return;
    case BinaryOp::Mul:
    case BinaryOp::Div:
      print_operand(b.lhs, 2, out);
      out += b.op == BinaryOp::Mul ? '*' : '/';
      print_operand(b.rhs, 3, out);
      return;
    case BinaryOp::Pow:
      print_operand(b.lhs, 5, out);
      out += '^';
      print_operand(b.rhs, 3, out);
      return;
  }
}

}  // namespace detail

/// Infix text that parse_expr() reads back to a structurally equal tree.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, 0, out);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

// ---------------------------------------------------------------------------
// Parsing

struct ParseOptions {
  bool fold = true;
};

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view text, ParseOptions options) : text_(text), options_(options) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  Expr unary_node(UnaryOp op, const Expr& child) const {
    return options_.fold ? make_unary(op, child) : Expr::raw_unary(op, child);
  }
  Expr binary_node(BinaryOp op, const Expr& lhs, const Expr& rhs) const {
    return options_.fold ? make_binary(op, lhs, rhs) : Expr::raw_binary(op, lhs, rhs);
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary_node(BinaryOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary_node(BinaryOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary_node(BinaryOp::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = binary_node(BinaryOp::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  // unary := '-' unary | power ; power := atom ('^' unary)?
  Expr unary() {
    if (accept('-')) return unary_node(UnaryOp::Neg, unary());
    return power();
  }

  Expr power() {
    Expr base = atom();
    skip_space();
    const std::size_t at = pos_;
    if (accept('^')) {
      Expr exponent = unary();
      if (!options_.fold) exponent = fold(exponent);
      if (!exponent.is_constant()) throw ParseError("exponent of '^' must be a constant", at);
      return binary_node(BinaryOp::Pow, base, exponent);
    }
    return base;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  Expr atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (ident_start(c)) return identifier_or_call();
    if (accept('(')) {
      Expr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return Expr::constant(std::strtod(literal.c_str(), nullptr));
  }

  Expr identifier_or_call() {
    const std::size_t start = pos_;
    std::string name;
    for (;;) {
      while (pos_ < text_.size() && ident_char(text_[pos_])) name += text_[pos_++];
      if (pos_ + 1 < text_.size() && text_[pos_] == '.' && ident_start(text_[pos_ + 1])) {
        name += text_[pos_++];
        continue;
      }
      break;
    }
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      UnaryOp op;
      if (name == "sin") {
        op = UnaryOp::Sin;
      } else if (name == "cos") {
        op = UnaryOp::Cos;
      } else if (name == "exp") {
        op = UnaryOp::Exp;
      } else {
        throw ParseError("unknown function '" + name + "'", start);
      }
      ++pos_;
      Expr arg = expression();
      if (!accept(')')) fail("expected ')'");
      return unary_node(op, arg);
    }
    return Expr::variable(std::move(name));
  }

  std::string_view text_;
  ParseOptions options_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses infix text. Precedence: ^ (right-associative) > unary minus > * / > + -.
/// Identifiers may be dotted (`source.V`) to name component variables.
inline Expr parse_expr(std::string_view text, ParseOptions options = {}) {
  return detail::ExprParser(text, options).parse();
}

// ---------------------------------------------------------------------------
// Queries

using Bindings = std::unordered_map<std::string, double>;

inline void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (const auto* v = e.as_variable()) {
    out.insert(v->name);
  } else if (const auto* u = e.as_unary()) {
    collect_variables(u->child, out);
  } else if (const auto* b = e.as_binary()) {
    collect_variables(b->lhs, out);
    collect_variables(b->rhs, out);
  }
}

inline std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

inline bool depends_on(const Expr& e, const std::string& name) {
  if (const auto* v = e.as_variable()) return v->name == name;
  if (const auto* u = e.as_unary()) return depends_on(u->child, name);
  if (const auto* b = e.as_binary()) return depends_on(b->lhs, name) || depends_on(b->rhs, name);
  return false;
}

/// Number of nodes in the tree.
inline std::size_t size(const Expr& e) {
  if (const auto* u = e.as_unary()) return 1 + size(u->child);
  if (const auto* b = e.as_binary()) return 1 + size(b->lhs) + size(b->rhs);
  return 1;
}

/// IEEE double evaluation. Division by zero and domain errors yield
/// non-finite values; callers check std::isfinite on the result.
inline double evaluate(const Expr& e, const Bindings& bindings) {
  if (const auto* c = e.as_constant()) return c->value;
  if (const auto* v = e.as_variable()) {
    const auto it = bindings.find(v->name);
    if (it == bindings.end()) throw UnboundVariable(v->name);
    return it->second;
  }
  if (const auto* u = e.as_unary()) return detail::apply(u->op, evaluate(u->child, bindings));
  const auto& b = *e.as_binary();
  return detail::apply(b.op, evaluate(b.lhs, bindings), evaluate(b.rhs, bindings));
}

// ---------------------------------------------------------------------------
// Transformations

/// Exact symbolic derivative with respect to `var`.
inline Expr differentiate(const Expr& e, const std::string& var) {
  if (e.is_constant()) return Expr::constant(0.0);
  if (const auto* v = e.as_variable()) return Expr::constant(v->name == var ? 1.0 : 0.0);
  if (!depends_on(e, var)) return Expr::constant(0.0);
  if (const auto* u = e.as_unary()) {
    const Expr da = differentiate(u->child, var);
    switch (u->op) {
      case UnaryOp::Neg: return -da;
      case UnaryOp::Sin: return cos(u->child) * da;
      case UnaryOp::Cos: return -sin(u->child) * da;
      case UnaryOp::Exp: return e * da;
    }
  }
  const auto& b = *e.as_binary();
  switch (b.op) {
    case BinaryOp::Add: return differentiate(b.lhs, var) + differentiate(b.rhs, var);
    case BinaryOp::Sub: return differentiate(b.lhs, var) - differentiate(b.rhs, var);
    case BinaryOp::Mul:
      return differentiate(b.lhs, var) * b.rhs + b.lhs * differentiate(b.rhs, var);
    case BinaryOp::Div: {
      const Expr num = differentiate(b.lhs, var) * b.rhs - b.lhs * differentiate(b.rhs, var);
      return num / pow(b.rhs, 2.0);
    }
    case BinaryOp::Pow: {
      const double a = b.rhs.value();
      return Expr::constant(a) * pow(b.lhs, a - 1.0) * differentiate(b.lhs, var);
    }
  }
  return Expr::constant(0.0);
}

using Replacements = std::map<std::string, Expr, std::less<>>;

/// Simultaneous substitution; replacement expressions are not re-scanned.
inline Expr substitute(const Expr& e, const Replacements& replacements) {
  if (const auto* v = e.as_variable()) {
    const auto it = replacements.find(v->name);
    return it == replacements.end() ? e : it->second;
  }
  if (const auto* u = e.as_unary()) return make_unary(u->op, substitute(u->child, replacements));
  if (const auto* b = e.as_binary()) {
    return make_binary(b->op, substitute(b->lhs, replacements), substitute(b->rhs, replacements));
  }
  return e;
}

/// e == coefficients . vars + constant. The constant may still hold symbols
/// other than `vars`; coefficients are always plain numbers.
struct AffineForm {
  std::vector<double> coefficients;
  Expr constant;

  bool constant_is_numeric() const { return constant.is_constant(); }
};

/// Returns the affine decomposition of `e` over `vars`, or nullopt when `e`
/// is not affine in them (including coefficients that depend on other symbols).
inline std::optional<AffineForm> linearize(const Expr& e, std::span<const std::string> vars) {
  AffineForm form;
  form.coefficients.reserve(vars.size());
  Replacements zero;
  for (const auto& v : vars) {
    const Expr d = differentiate(e, v);
    if (!d.is_constant()) return std::nullopt;
    form.coefficients.push_back(d.value());
    zero.emplace(v, Expr::constant(0.0));
  }
  form.constant = substitute(e, zero);
  return form;
}

// ---------------------------------------------------------------------------
// Compiled evaluation

/// Flat postfix program over a fixed variable layout, for repeated
/// evaluation inside solver loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  /// Every free variable of `e` must appear in `slots`.
  CompiledExpr(const Expr& e, const std::unordered_map<std::string, std::size_t>& slots) {
    emit(e, slots);
  }

  double operator()(std::span<const double> values) const {
    thread_local std::vector<double> stack;
    stack.clear();
    for (const auto& ins : code_) {
      switch (ins.kind) {
        case Kind::Const: stack.push_back(ins.value); break;
        case Kind::Load: stack.push_back(values[ins.slot]); break;
        case Kind::Unary: stack.back() = detail::apply(ins.unary, stack.back()); break;
        case Kind::Binary: {
          const double rhs = stack.back();
          stack.pop_back();
          stack.back() = detail::apply(ins.binary, stack.back(), rhs);
          break;
        }
      }
    }
    return stack.empty() ? 0.0 : stack.back();
  }

 private:
  enum class Kind { Const, Load, Unary, Binary };
  struct Instruction {
    Kind kind;
    double value = 0.0;
    std::size_t slot = 0;
    UnaryOp unary = UnaryOp::Neg;
    BinaryOp binary = BinaryOp::Add;
  };

  void emit(const Expr& e, const std::unordered_map<std::string, std::size_t>& slots) {
    if (const auto* c = e.as_constant()) {
      code_.push_back({Kind::Const, c->value});
    } else if (const auto* v = e.as_variable()) {
      const auto it = slots.find(v->name);
      if (it == slots.end()) throw UnboundVariable(v->name);
      code_.push_back({Kind::Load, 0.0, it->second});
    } else if (const auto* u = e.as_unary()) {
      emit(u->child, slots);
      code_.push_back({Kind::Unary, 0.0, 0, u->op});
    } else {
      const auto& b = *e.as_binary();
      emit(b.lhs, slots);
      emit(b.rhs, slots);
      code_.push_back({Kind::Binary, 0.0, 0, UnaryOp::Neg, b.op});
    }
  }

  std::vector<Instruction> code_;
};

}  // namespace optctl
