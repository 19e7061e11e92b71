#pragma once

// Closed-form scalar expression language.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//
// '^' is right associative and binds tighter than unary minus, so "-x^2" is
// -(x^2). Implicit multiplication ("2x") is a syntax error. Function names are
// the elementary set of jet.hpp.

#include <charconv>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include "cottonkit/jet.hpp"

namespace cottonkit {

/// Parameter name -> value, e.g. {"C", 1.0}.
using ParamEnv = std::map<std::string, double>;

/// 1-based character range [begin, end) in the source text.
struct SourceSpan {
  int begin = 0;
  int end = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int position, std::string expected)
      : std::runtime_error("syntax error at position " + std::to_string(position) + ": " + expected),
        position_(position),
        expected_(std::move(expected)) {}
  int position() const { return position_; }
  const std::string& expected() const { return expected_; }

 private:
  int position_;
  std::string expected_;
};

class UnresolvedSymbol : public std::runtime_error {
 public:
  explicit UnresolvedSymbol(const std::string& name)
      : std::runtime_error("unresolved symbol '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Domain violation raised while evaluating a sub-expression.
class ExprDomainError : public DomainError {
 public:
  ExprDomainError(const std::string& what, SourceSpan span, std::string subexpr)
      : DomainError(what + " in '" + subexpr + "' (characters " + std::to_string(span.begin) + "-" +
                    std::to_string(span.end - 1) + ")"),
        span_(span),
        subexpr_(std::move(subexpr)) {}
  SourceSpan span() const { return span_; }
  const std::string& subexpression() const { return subexpr_; }

 private:
  SourceSpan span_;
  std::string subexpr_;
};

enum class ExprKind { Number, Symbol, Add, Sub, Mul, Div, Pow, Neg, Call };

struct ExprNode {
  ExprKind kind = ExprKind::Number;
  double number = 0.0;
  std::string name;
  UnaryFn fn = UnaryFn::Exp;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
  SourceSpan span;
};

/// Immutable expression tree; copies share nodes.
class ExprAst {
 public:
  ExprAst() : ExprAst(0.0) {}
  ExprAst(double value) {  // NOLINT: literals convert implicitly
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Number;
    n->number = value;
    node_ = std::move(n);
  }
  explicit ExprAst(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  static ExprAst symbol(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Symbol;
    n->name = std::move(name);
    return ExprAst(std::move(n));
  }
  static ExprAst call(UnaryFn fn, const ExprAst& arg) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Call;
    n->fn = fn;
    n->lhs = arg.node_;
    return ExprAst(std::move(n));
  }
  static ExprAst binary(ExprKind kind, const ExprAst& a, const ExprAst& b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->lhs = a.node_;
    n->rhs = b.node_;
    return ExprAst(std::move(n));
  }

  const ExprNode& node() const { return *node_; }
  const std::shared_ptr<const ExprNode>& ptr() const { return node_; }

  bool is_zero_literal() const { return node_->kind == ExprKind::Number && node_->number == 0.0; }

  friend ExprAst operator+(const ExprAst& a, const ExprAst& b) { return binary(ExprKind::Add, a, b); }
  friend ExprAst operator-(const ExprAst& a, const ExprAst& b) { return binary(ExprKind::Sub, a, b); }
  friend ExprAst operator*(const ExprAst& a, const ExprAst& b) { return binary(ExprKind::Mul, a, b); }
  friend ExprAst operator/(const ExprAst& a, const ExprAst& b) { return binary(ExprKind::Div, a, b); }
  ExprAst operator-() const {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Neg;
    n->lhs = node_;
    return ExprAst(std::move(n));
  }

 private:
  std::shared_ptr<const ExprNode> node_;
};

inline ExprAst pow(const ExprAst& base, const ExprAst& e) { return ExprAst::binary(ExprKind::Pow, base, e); }

inline std::optional<UnaryFn> function_by_name(std::string_view name) {
  static const std::pair<std::string_view, UnaryFn> table[] = {
      {"tanh", UnaryFn::Tanh}, {"cosh", UnaryFn::Cosh}, {"sinh", UnaryFn::Sinh},
      {"exp", UnaryFn::Exp},   {"ln", UnaryFn::Ln},     {"sqrt", UnaryFn::Sqrt},
      {"sin", UnaryFn::Sin},   {"cos", UnaryFn::Cos},   {"arctan", UnaryFn::Arctan}};
  for (const auto& [n, f] : table)
    if (n == name) return f;
  return std::nullopt;
}

namespace detail {

inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprAst parse() {
    next();
    ExprAst e = expr();
    if (tok_.kind != Tok::End) fail("expected operator or end of input");
    return e;
  }

 private:
  enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  struct Token {
    Tok kind = Tok::End;
    int pos = 1;  // 1-based
    int end = 1;
    double number = 0.0;
    std::string text;
  };

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(tok_.pos, msg); }

  void next() {
    while (cur_ < text_.size() && (text_[cur_] == ' ' || text_[cur_] == '\t' || text_[cur_] == '\n' ||
                                   text_[cur_] == '\r'))
      ++cur_;
    tok_ = Token{};
    tok_.pos = static_cast<int>(cur_) + 1;
    if (cur_ >= text_.size()) {
      tok_.kind = Tok::End;
      tok_.end = tok_.pos;
      return;
    }
    const char c = text_[cur_];
    if (is_digit(c) || (c == '.' && cur_ + 1 < text_.size() && is_digit(text_[cur_ + 1]))) {
      std::size_t j = cur_;
      while (j < text_.size() && is_digit(text_[j])) ++j;
      if (j < text_.size() && text_[j] == '.') {
        ++j;
        while (j < text_.size() && is_digit(text_[j])) ++j;
      }
      if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
        if (k >= text_.size() || !is_digit(text_[k])) {
          tok_.pos = static_cast<int>(k) + 1;
          throw ParseError(tok_.pos, "expected digits in number exponent");
        }
        while (k < text_.size() && is_digit(text_[k])) ++k;
        j = k;
      }
      double v = 0.0;
      const auto res = std::from_chars(text_.data() + cur_, text_.data() + j, v);
      if (res.ec != std::errc() || res.ptr != text_.data() + j) fail("malformed number");
      tok_.kind = Tok::Number;
      tok_.number = v;
      cur_ = j;
      tok_.end = static_cast<int>(cur_) + 1;
      return;
    }
    if (is_alpha(c)) {
      std::size_t j = cur_ + 1;
      while (j < text_.size() && (is_alpha(text_[j]) || is_digit(text_[j]) || text_[j] == '_')) ++j;
      tok_.kind = Tok::Ident;
      tok_.text = std::string(text_.substr(cur_, j - cur_));
      cur_ = j;
      tok_.end = static_cast<int>(cur_) + 1;
      return;
    }
    switch (c) {
      case '+': tok_.kind = Tok::Plus; break;
      case '-': tok_.kind = Tok::Minus; break;
      case '*': tok_.kind = Tok::Star; break;
      case '/': tok_.kind = Tok::Slash; break;
      case '^': tok_.kind = Tok::Caret; break;
      case '(': tok_.kind = Tok::LParen; break;
      case ')': tok_.kind = Tok::RParen; break;
      default: fail(std::string("unexpected character '") + c + "'");
    }
    ++cur_;
    tok_.end = static_cast<int>(cur_) + 1;
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > 200) p_.fail("expression nested too deeply");
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  static ExprAst with_span(ExprKind kind, const ExprAst& a, const ExprAst* b, int begin, int end) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->lhs = a.ptr();
    if (b) n->rhs = b->ptr();
    n->span = {begin, end};
    return ExprAst(std::move(n));
  }

  ExprAst expr() {
    DepthGuard guard(*this);
    const int begin = tok_.pos;
    ExprAst lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const ExprKind k = tok_.kind == Tok::Plus ? ExprKind::Add : ExprKind::Sub;
      next();
      ExprAst rhs = term();
      lhs = with_span(k, lhs, &rhs, begin, rhs.node().span.end);
    }
    return lhs;
  }

  ExprAst term() {
    const int begin = tok_.pos;
    ExprAst lhs = factor();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const ExprKind k = tok_.kind == Tok::Star ? ExprKind::Mul : ExprKind::Div;
      next();
      ExprAst rhs = factor();
      lhs = with_span(k, lhs, &rhs, begin, rhs.node().span.end);
    }
    return lhs;
  }

  ExprAst factor() {
    DepthGuard guard(*this);
    if (tok_.kind == Tok::Minus) {
      const int begin = tok_.pos;
      next();
      ExprAst operand = factor();
      return with_span(ExprKind::Neg, operand, nullptr, begin, operand.node().span.end);
    }
    return power();
  }

  ExprAst power() {
    const int begin = tok_.pos;
    ExprAst base = atom();
    if (tok_.kind == Tok::Caret) {
      next();
      ExprAst e = factor();
      return with_span(ExprKind::Pow, base, &e, begin, e.node().span.end);
    }
    return base;
  }

  ExprAst atom() {
    auto n = std::make_shared<ExprNode>();
    n->span = {tok_.pos, tok_.end};
    switch (tok_.kind) {
      case Tok::Number:
        n->kind = ExprKind::Number;
        n->number = tok_.number;
        next();
        return ExprAst(std::move(n));
      case Tok::Ident: {
        const std::string name = tok_.text;
        const int name_pos = tok_.pos;
        const auto fn = function_by_name(name);
        next();
        if (fn) {
          if (tok_.kind != Tok::LParen) fail("expected '(' after function name '" + name + "'");
          next();
          ExprAst arg = expr();
          if (tok_.kind != Tok::RParen) fail("expected ')'");
          n->kind = ExprKind::Call;
          n->fn = *fn;
          n->lhs = arg.ptr();
          n->span = {name_pos, tok_.end};
          next();
          return ExprAst(std::move(n));
        }
        if (tok_.kind == Tok::LParen) throw ParseError(name_pos, "unknown function '" + name + "'");
        n->kind = ExprKind::Symbol;
        n->name = name;
        return ExprAst(std::move(n));
      }
      case Tok::LParen: {
        const int begin = tok_.pos;
        next();
        ExprAst inner = expr();
        if (tok_.kind != Tok::RParen) fail("expected ')'");
        const int end = tok_.end;
        next();
        // keep the inner node; widen its span to cover the parentheses
        auto copy = std::make_shared<ExprNode>(inner.node());
        copy->span = {begin, end};
        return ExprAst(std::move(copy));
      }
      case Tok::End: fail("expected expression");
      default: fail("expected expression");
    }
  }

  std::string_view text_;
  std::size_t cur_ = 0;
  Token tok_;
  int depth_ = 0;
};

inline int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Number: return n.number < 0 ? 3 : 5;  // -2 prints like unary minus
    default: return 5;
  }
}

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void print(const ExprNode& n, std::string& out) {
  auto wrap = [&](const ExprNode& child, bool parens) {
    if (parens) out += '(';
    print(child, out);
    if (parens) out += ')';
  };
  switch (n.kind) {
    case ExprKind::Number:
      out += format_number(n.number);
      return;
    case ExprKind::Symbol: out += n.name; return;
    case ExprKind::Call:
      out += to_string(n.fn);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    case ExprKind::Neg:
      out += '-';
      wrap(*n.lhs, precedence(*n.lhs) < 3);
      return;
    case ExprKind::Pow:
      wrap(*n.lhs, precedence(*n.lhs) < 5);
      out += '^';
      wrap(*n.rhs, precedence(*n.rhs) < 3);
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == ExprKind::Add ? " + " : n.kind == ExprKind::Sub ? " - " : n.kind == ExprKind::Mul ? "*" : "/";
      wrap(*n.lhs, precedence(*n.lhs) < p);
      out += op;
      wrap(*n.rhs, precedence(*n.rhs) <= p);
      return;
    }
  }
}

}  // namespace detail

inline ExprAst parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

inline std::string to_string(const ExprAst& e) {
  std::string out;
  detail::print(e.node(), out);
  return out;
}

inline void collect_symbols(const ExprNode& n, std::set<std::string>& out) {
  if (n.kind == ExprKind::Symbol) out.insert(n.name);
  if (n.lhs) collect_symbols(*n.lhs, out);
  if (n.rhs) collect_symbols(*n.rhs, out);
}

inline std::set<std::string> symbols(const ExprAst& e) {
  std::set<std::string> s;
  collect_symbols(e.node(), s);
  return s;
}

/// Replaces symbols by expressions; the result shares untouched subtrees.
inline ExprAst substitute(const ExprAst& e, const std::map<std::string, ExprAst>& with) {
  const ExprNode& n = e.node();
  if (n.kind == ExprKind::Symbol) {
    auto it = with.find(n.name);
    return it == with.end() ? e : it->second;
  }
  if (!n.lhs) return e;
  auto copy = std::make_shared<ExprNode>(n);
  copy->lhs = substitute(ExprAst(n.lhs), with).ptr();
  if (n.rhs) copy->rhs = substitute(ExprAst(n.rhs), with).ptr();
  return ExprAst(std::move(copy));
}

/// Symbol lookup for evaluation: coordinates in declared order, then parameters.
template <class Scalar>
struct SymbolTable {
  std::vector<std::pair<std::string, Scalar>> entries;

  const Scalar* find(const std::string& name) const {
    for (const auto& [n, v] : entries)
      if (n == name) return &v;
    return nullptr;
  }
};

namespace detail {

template <class Scalar, class Lift>
Scalar evaluate(const ExprNode& n, const SymbolTable<Scalar>& table, const Lift& lift) {
  auto guarded = [&](auto&& f) -> Scalar {
    try {
      return f();
    } catch (const ExprDomainError&) {
      throw;
    } catch (const DomainError& err) {
      std::string text;
      print(n, text);
      throw ExprDomainError(err.what(), n.span, text);
    }
  };
  switch (n.kind) {
    case ExprKind::Number: return lift(n.number);
    case ExprKind::Symbol: {
      const Scalar* v = table.find(n.name);
      if (!v) throw UnresolvedSymbol(n.name);
      return *v;
    }
    case ExprKind::Add: return evaluate(*n.lhs, table, lift) + evaluate(*n.rhs, table, lift);
    case ExprKind::Sub: return evaluate(*n.lhs, table, lift) - evaluate(*n.rhs, table, lift);
    case ExprKind::Mul: return evaluate(*n.lhs, table, lift) * evaluate(*n.rhs, table, lift);
    case ExprKind::Neg: return -evaluate(*n.lhs, table, lift);
    case ExprKind::Div: {
      Scalar a = evaluate(*n.lhs, table, lift);
      Scalar b = evaluate(*n.rhs, table, lift);
      return guarded([&]() -> Scalar {
        if constexpr (std::is_same_v<Scalar, double>) {
          if (b == 0.0) throw DomainError("division by zero");
          return a / b;
        } else {
          return a / b;
        }
      });
    }
    case ExprKind::Pow: {
      Scalar a = evaluate(*n.lhs, table, lift);
      Scalar b = evaluate(*n.rhs, table, lift);
      return guarded([&]() -> Scalar {
        if constexpr (std::is_same_v<Scalar, double>) {
          return pow_real(a, b);
        } else {
          return pow(a, b);
        }
      });
    }
    case ExprKind::Call: {
      Scalar a = evaluate(*n.lhs, table, lift);
      return guarded([&]() -> Scalar { return apply(n.fn, a); });
    }
  }
  throw std::logic_error("unreachable expression node");
}

}  // namespace detail

/// Throws UnresolvedSymbol unless every symbol is a coordinate or parameter.
inline void validate_symbols(const ExprAst& e, const std::vector<std::string>& coordinates, const ParamEnv& env) {
  for (const auto& s : symbols(e)) {
    bool ok = env.count(s) > 0;
    for (const auto& c : coordinates) ok = ok || c == s;
    if (!ok) throw UnresolvedSymbol(s);
  }
}

/// Evaluates over caller-provided jets (used for pullbacks and compositions).
inline Jet eval_jet(const ExprAst& e, const SymbolTable<Jet>& table, int num_vars, int order) {
  return detail::evaluate<Jet>(e.node(), table,
                               [&](double v) { return Jet::constant(v, num_vars, order); });
}

inline SymbolTable<Jet> coordinate_jets(std::span<const double> point, const std::vector<std::string>& coordinates,
                                        const ParamEnv& env, int order) {
  if (point.size() != coordinates.size())
    throw std::invalid_argument("point dimension " + std::to_string(point.size()) + " does not match " +
                                std::to_string(coordinates.size()) + " coordinates");
  const int nv = static_cast<int>(coordinates.size());
  SymbolTable<Jet> t;
  for (int i = 0; i < nv; ++i) t.entries.emplace_back(coordinates[i], Jet::variable(i, point[i], nv, order));
  for (const auto& [name, v] : env) t.entries.emplace_back(name, Jet::constant(v, nv, order));
  return t;
}

/// Jet of the expression at `point`; coordinates are lifted as jet variables.
inline Jet eval_jet(const ExprAst& e, std::span<const double> point, const std::vector<std::string>& coordinates,
                    const ParamEnv& env, int order) {
  const auto t = coordinate_jets(point, coordinates, env, order);
  return eval_jet(e, t, static_cast<int>(coordinates.size()), order);
}

/// Plain recursive real evaluation.
inline double eval_real(const ExprAst& e, std::span<const double> point, const std::vector<std::string>& coordinates,
                        const ParamEnv& env) {
  if (point.size() != coordinates.size()) throw std::invalid_argument("point dimension does not match coordinates");
  SymbolTable<double> t;
  for (std::size_t i = 0; i < coordinates.size(); ++i) t.entries.emplace_back(coordinates[i], point[i]);
  for (const auto& [name, v] : env) t.entries.emplace_back(name, v);
  return detail::evaluate<double>(e.node(), t, [](double v) { return v; });
}

inline double eval_real(const ExprAst& e, const ParamEnv& env) {
  return eval_real(e, std::span<const double>{}, {}, env);
}

}  // namespace cottonkit
