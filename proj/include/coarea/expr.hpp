#pragma once

// Scalar expression language over x1..xn.
//
// Grammar (whitespace insignificant):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-'? atom
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Identifiers: x1..xN; x, y, z as aliases for x1..x3 when n <= 3; the
// constants pi and e; functions sin cos exp log sqrt tanh.
//
// '^' with an integer exponent multiplies repeatedly (any base); with a
// non-integer exponent it is defined for positive bases only.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "coarea/dual.hpp"
#include "coarea/errors.hpp"

namespace coarea {

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Log, Sqrt, Tanh };

struct Node {
  enum class Kind { Constant, Variable, Neg, Binary, Call } kind;
  double value = 0.0;     // Constant
  std::string sym;        // Constant spelling ("pi", "e"), empty for literals
  int var = 0;            // Variable, 0-based
  BinOp bin{};            // Binary
  Func fn{};              // Call
  std::unique_ptr<Node> a, b;  // Neg/Call use a only
};

using NodePtr = std::unique_ptr<Node>;

namespace detail {

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Tanh: return "tanh";
  }
  return "?";
}

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Pretty-printer. Emits canonical variable names x1..xn and just enough
// parentheses that re-parsing reproduces the tree structure.
inline std::string print_expr(const Node& n) {
  auto atom_like = [](const Node& c) {
    return c.kind == Node::Kind::Variable || c.kind == Node::Kind::Call ||
           (c.kind == Node::Kind::Constant && !std::signbit(c.value));
  };
  auto paren = [](const std::string& s) { return "(" + s + ")"; };
  switch (n.kind) {
    case Node::Kind::Constant:
      if (!n.sym.empty()) return n.sym;
      return detail::format_double(n.value);
    case Node::Kind::Variable:
      return "x" + std::to_string(n.var + 1);
    case Node::Kind::Call:
      return std::string(detail::func_name(n.fn)) + "(" + print_expr(*n.a) + ")";
    case Node::Kind::Neg: {
      std::string inner = print_expr(*n.a);
      return "-" + (atom_like(*n.a) ? inner : paren(inner));
    }
    case Node::Kind::Binary: {
      const Node& l = *n.a;
      const Node& r = *n.b;
      auto is_addsub = [](const Node& c) {
        return c.kind == Node::Kind::Binary &&
               (c.bin == BinOp::Add || c.bin == BinOp::Sub);
      };
      auto is_binary = [](const Node& c) { return c.kind == Node::Kind::Binary; };
      std::string ls = print_expr(l);
      std::string rs = print_expr(r);
      switch (n.bin) {
        case BinOp::Add:
          return ls + "+" + (is_addsub(r) ? paren(rs) : rs);
        case BinOp::Sub:
          return ls + "-" + (is_addsub(r) ? paren(rs) : rs);
        case BinOp::Mul:
          return (is_addsub(l) ? paren(ls) : ls) + "*" +
                 (is_binary(r) ? paren(rs) : rs);
        case BinOp::Div:
          return (is_addsub(l) ? paren(ls) : ls) + "/" +
                 (is_binary(r) ? paren(rs) : rs);
        case BinOp::Pow:
          // '^' is right-associative and binds a whole unary on the left.
          return (is_binary(l) ? paren(ls) : ls) + "^" +
                 (is_binary(r) && r.bin != BinOp::Pow ? paren(rs) : rs);
      }
      return "?";
    }
  }
  return "?";
}

namespace detail {

template <class T>
T int_pow(T base, long long k) {
  T r{1.0};
  T b = base;
  unsigned long long e =
      k >= 0 ? static_cast<unsigned long long>(k)
             : static_cast<unsigned long long>(-(k + 1)) + 1ull;
  while (e != 0) {
    if (e & 1ull) r = r * b;
    b = b * b;
    e >>= 1;
  }
  return k >= 0 ? r : T{1.0} / r;
}

// Evaluate the tree at the point provided by `var`, which maps a 0-based
// variable index to T. Instantiated with T = double (plain evaluation) and
// T = Dual (one forward-mode pass).
template <class T, class VarFn>
T eval_node(const Node& n, const VarFn& var) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  using std::tanh;
  switch (n.kind) {
    case Node::Kind::Constant:
      return T{n.value};
    case Node::Kind::Variable:
      return var(n.var);
    case Node::Kind::Neg:
      return -eval_node<T>(*n.a, var);
    case Node::Kind::Call: {
      T arg = eval_node<T>(*n.a, var);
      switch (n.fn) {
        case Func::Sin: return sin(arg);
        case Func::Cos: return cos(arg);
        case Func::Exp: return exp(arg);
        case Func::Log:
          if (value_of(arg) <= 0.0)
            throw DomainError("log of non-positive value", print_expr(n));
          return log(arg);
        case Func::Sqrt:
          if (value_of(arg) < 0.0)
            throw DomainError("sqrt of negative value", print_expr(n));
          return sqrt(arg);
        case Func::Tanh: return tanh(arg);
      }
      return T{};
    }
    case Node::Kind::Binary: {
      T l = eval_node<T>(*n.a, var);
      if (n.bin == BinOp::Pow) {
        T r = eval_node<T>(*n.b, var);
        double ev = value_of(r);
        bool integer_exp = deriv_of(r) == 0.0 && std::fabs(ev) <= 1e15 &&
                           ev == std::trunc(ev);
        if (integer_exp) {
          long long k = static_cast<long long>(ev);
          if (value_of(l) == 0.0 && k < 0)
            throw DomainError("zero base with negative exponent", print_expr(n));
          return int_pow(l, k);
        }
        if (value_of(l) <= 0.0)
          throw DomainError("non-integer power of non-positive base",
                            print_expr(n));
        return exp(log(l) * r);
      }
      T r = eval_node<T>(*n.b, var);
      switch (n.bin) {
        case BinOp::Add: return l + r;
        case BinOp::Sub: return l - r;
        case BinOp::Mul: return l * r;
        case BinOp::Div:
          if (value_of(r) == 0.0)
            throw DomainError("division by zero", print_expr(n));
          return l / r;
        case BinOp::Pow: break;  // handled above
      }
      return T{};
    }
  }
  return T{};
}

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) { advance(); }

  NodePtr parse() {
    NodePtr e = parse_expr();
    if (tok_.kind != Tok::End)
      throw ParseError("unexpected '" + tok_.text + "'", tok_.pos);
    return e;
  }

 private:
  struct Token {
    enum Kind { Num, Ident, Op, LParen, RParen, End } kind = End;
    std::string text;
    double value = 0.0;
    char op = 0;
    int pos = 0;  // 1-based
  };
  using Tok = Token::Kind;

  std::string_view src_;
  int dim_;
  std::size_t cur_ = 0;
  Token tok_;

  void advance() {
    while (cur_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[cur_])))
      ++cur_;
    Token t;
    t.pos = static_cast<int>(cur_) + 1;
    if (cur_ >= src_.size()) {
      t.kind = Tok::End;
      tok_ = t;
      return;
    }
    char c = src_[cur_];
    if (c == '(') {
      t.kind = Tok::LParen;
      t.text = "(";
      ++cur_;
    } else if (c == ')') {
      t.kind = Tok::RParen;
      t.text = ")";
      ++cur_;
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      t.kind = Tok::Op;
      t.op = c;
      t.text = std::string(1, c);
      ++cur_;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = cur_;
      bool any_digit = false;
      while (cur_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[cur_]))) {
        ++cur_;
        any_digit = true;
      }
      if (cur_ < src_.size() && src_[cur_] == '.') {
        ++cur_;
        while (cur_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[cur_]))) {
          ++cur_;
          any_digit = true;
        }
      }
      if (!any_digit) throw ParseError("malformed number", t.pos);
      if (cur_ < src_.size() && (src_[cur_] == 'e' || src_[cur_] == 'E')) {
        std::size_t mark = cur_;
        ++cur_;
        if (cur_ < src_.size() && (src_[cur_] == '+' || src_[cur_] == '-')) ++cur_;
        if (cur_ < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[cur_]))) {
          while (cur_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[cur_])))
            ++cur_;
        } else {
          cur_ = mark;  // 'e' belongs to the next token
        }
      }
      t.kind = Tok::Num;
      t.text = std::string(src_.substr(start, cur_ - start));
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(),
                                 t.value);
      if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
        throw ParseError("malformed number '" + t.text + "'", t.pos);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = cur_;
      while (cur_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[cur_])) ||
              src_[cur_] == '_'))
        ++cur_;
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, cur_ - start));
    } else {
      throw ParseError("unexpected character '" + std::string(1, c) + "'",
                       t.pos);
    }
    tok_ = t;
  }

  bool accept_op(char c) {
    if (tok_.kind == Tok::Op && tok_.op == c) {
      advance();
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept_op('+'))
        lhs = make_binary(BinOp::Add, std::move(lhs), parse_term());
      else if (accept_op('-'))
        lhs = make_binary(BinOp::Sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (accept_op('*'))
        lhs = make_binary(BinOp::Mul, std::move(lhs), parse_factor());
      else if (accept_op('/'))
        lhs = make_binary(BinOp::Div, std::move(lhs), parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    NodePtr base = parse_unary();
    if (accept_op('^'))
      return make_binary(BinOp::Pow, std::move(base), parse_factor());
    return base;
  }

  NodePtr parse_unary() {
    if (accept_op('-')) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Neg;
      n->a = parse_atom();
      return n;
    }
    return parse_atom();
  }

  NodePtr parse_atom() {
    if (tok_.kind == Tok::Num) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Constant;
      n->value = tok_.value;
      advance();
      return n;
    }
    if (tok_.kind == Tok::LParen) {
      advance();
      NodePtr e = parse_expr();
      if (tok_.kind != Tok::RParen) throw ParseError("expected ')'", tok_.pos);
      advance();
      return e;
    }
    if (tok_.kind == Tok::Ident) return parse_ident();
    throw ParseError("expected number, identifier or '('", tok_.pos);
  }

  NodePtr parse_ident() {
    const std::string name = tok_.text;
    const int pos = tok_.pos;
    advance();

    static constexpr std::pair<std::string_view, Func> kFuncs[] = {
        {"sin", Func::Sin},   {"cos", Func::Cos}, {"exp", Func::Exp},
        {"log", Func::Log},   {"sqrt", Func::Sqrt}, {"tanh", Func::Tanh}};
    for (auto [fname, fn] : kFuncs) {
      if (name == fname) {
        if (tok_.kind != Tok::LParen)
          throw ParseError("expected '(' after function name '" + name + "'",
                           tok_.pos);
        advance();
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Call;
        n->fn = fn;
        n->a = parse_expr();
        if (tok_.kind != Tok::RParen) throw ParseError("expected ')'", tok_.pos);
        advance();
        return n;
      }
    }

    if (name == "pi") return make_constant(std::numbers::pi, "pi");
    if (name == "e") return make_constant(std::numbers::e, "e");

    if (name == "x" || name == "y" || name == "z") {
      if (dim_ > 3)
        throw ParseError("unknown identifier '" + name +
                             "' (aliases x,y,z require dimension <= 3)",
                         pos);
      int idx = name == "x" ? 1 : name == "y" ? 2 : 3;
      return make_variable(idx, name, pos);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        long idx = std::strtol(name.c_str() + 1, nullptr, 10);
        if (idx < 1)
          throw ParseError("invalid variable index in '" + name + "'", pos);
        return make_variable(static_cast<int>(idx), name, pos);
      }
    }
    throw ParseError("unknown identifier '" + name + "'", pos);
  }

  NodePtr make_variable(int index1, const std::string& name, int pos) {
    if (index1 > dim_)
      throw ParseError("variable '" + name + "' has index " +
                           std::to_string(index1) + " > dimension " +
                           std::to_string(dim_),
                       pos);
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Variable;
    n->var = index1 - 1;
    return n;
  }

  static NodePtr make_constant(double v, std::string sym) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Constant;
    n->value = v;
    n->sym = std::move(sym);
    return n;
  }

  static NodePtr make_binary(BinOp op, NodePtr a, NodePtr b) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Binary;
    n->bin = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
};

}  // namespace detail

inline NodePtr parse_expression(std::string_view source, int dim) {
  if (dim < 1) throw Error("dimension must be >= 1");
  detail::Parser p(source, dim);
  return p.parse();
}

}  // namespace coarea
