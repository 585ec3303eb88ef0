#include "twoscale/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace twoscale {

enum class Expr::Op : int { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt };

using Op = Expr::Op;

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  Var var = Var::t;
  std::shared_ptr<const Node> a, b;
};

namespace {

const char* var_name(Var v) {
  static const char* names[] = {"t", "x1", "x2", "y1", "y2"};
  return names[static_cast<int>(v)];
}

const char* func_name(Op op) {
  switch (op) {
    case Op::Sin:
      return "sin";
    case Op::Cos:
      return "cos";
    case Op::Exp:
      return "exp";
    case Op::Log:
      return "log";
    case Op::Sqrt:
      return "sqrt";
    default:
      return "?";
  }
}

double apply(Op op, double x) {
  switch (op) {
    case Op::Sin:
      return std::sin(x);
    case Op::Cos:
      return std::cos(x);
    case Op::Exp:
      return std::exp(x);
    case Op::Log:
      return std::log(x);
    case Op::Sqrt:
      return std::sqrt(x);
    case Op::Neg:
      return -x;
    default:
      return x;
  }
}

}  // namespace


Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  auto node = std::make_shared<Node>();
  node->op = Op::Const;
  node->value = value;
  node_ = std::move(node);
}

Expr Expr::variable(Var v) {
  auto node = std::make_shared<Node>();
  node->op = Op::Var;
  node->var = v;
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

std::optional<double> Expr::constant_value() const {
  if (node_->op == Op::Const) return node_->value;
  return std::nullopt;
}

bool Expr::depends_on(Var v) const {
  switch (node_->op) {
    case Op::Const:
      return false;
    case Op::Var:
      return node_->var == v;
    default:
      return (node_->a && Expr::from_node(node_->a).depends_on(v)) ||
             (node_->b && Expr::from_node(node_->b).depends_on(v));
  }
}

double Expr::operator()(const ExprArgs& args) const { return evaluate(*node_, args); }

double Expr::evaluate(const Node& n, const ExprArgs& args) {
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var:
      return args[static_cast<int>(n.var)];
    case Op::Add:
      return evaluate(*n.a, args) + evaluate(*n.b, args);
    case Op::Sub:
      return evaluate(*n.a, args) - evaluate(*n.b, args);
    case Op::Mul:
      return evaluate(*n.a, args) * evaluate(*n.b, args);
    case Op::Div:
      return evaluate(*n.a, args) / evaluate(*n.b, args);
    case Op::Pow: {
      const double base = evaluate(*n.a, args);
      if (n.b->op == Op::Const && n.b->value == 2.0) return base * base;
      return std::pow(base, evaluate(*n.b, args));
    }
    default:
      return apply(n.op, evaluate(*n.a, args));
  }
}

Expr Expr::diff(Var v) const {
  if (!depends_on(v)) return Expr(0.0);
  const Node& n = *node_;
  const Expr a = n.a ? from_node(n.a) : Expr(0.0);
  const Expr b = n.b ? from_node(n.b) : Expr(0.0);
  switch (n.op) {
    case Op::Const:
      return Expr(0.0);
    case Op::Var:
      return Expr(1.0);
    case Op::Add:
      return a.diff(v) + b.diff(v);
    case Op::Sub:
      return a.diff(v) - b.diff(v);
    case Op::Mul:
      return a.diff(v) * b + a * b.diff(v);
    case Op::Div:
      return (a.diff(v) * b - a * b.diff(v)) / (b * b);
    case Op::Neg:
      return -a.diff(v);
    case Op::Pow:
      if (!b.depends_on(v)) return b * pow(a, b - 1.0) * a.diff(v);
      return *this * (b.diff(v) * log(a) + b * a.diff(v) / a);
    case Op::Sin:
      return cos(a) * a.diff(v);
    case Op::Cos:
      return -(sin(a) * a.diff(v));
    case Op::Exp:
      return *this * a.diff(v);
    case Op::Log:
      return a.diff(v) / a;
    case Op::Sqrt:
      return a.diff(v) / (2.0 * *this);
  }
  return Expr(0.0);
}

std::string Expr::str() const {
  const Node& n = *node_;
  auto sa = [&] { return from_node(n.a).str(); };
  auto sb = [&] { return from_node(n.b).str(); };
  switch (n.op) {
    case Op::Const: {
      std::ostringstream ss;
      ss.precision(17);
      ss << n.value;
      return n.value < 0 ? "(" + ss.str() + ")" : ss.str();
    }
    case Op::Var:
      return var_name(n.var);
    case Op::Add:
      return "(" + sa() + " + " + sb() + ")";
    case Op::Sub:
      return "(" + sa() + " - " + sb() + ")";
    case Op::Mul:
      return "(" + sa() + " * " + sb() + ")";
    case Op::Div:
      return "(" + sa() + " / " + sb() + ")";
    case Op::Pow:
      return "(" + sa() + " ^ " + sb() + ")";
    case Op::Neg:
      return "(-" + sa() + ")";
    default:
      return std::string(func_name(n.op)) + "(" + sa() + ")";
  }
}

Expr Expr::make_node(Op op, const Expr& a, const Expr& b) {
  const auto ca = a.constant_value();
  const auto cb = b.constant_value();
  const bool unary = op >= Op::Neg && op != Op::Pow;
  if (ca && (unary || cb)) {
    switch (op) {
      case Op::Add:
        return Expr(*ca + *cb);
      case Op::Sub:
        return Expr(*ca - *cb);
      case Op::Mul:
        return Expr(*ca * *cb);
      case Op::Div:
        return Expr(*ca / *cb);
      case Op::Pow:
        return Expr(std::pow(*ca, *cb));
      default:
        return Expr(apply(op, *ca));
    }
  }
  switch (op) {
    case Op::Add:
      if (ca && *ca == 0.0) return b;
      if (cb && *cb == 0.0) return a;
      break;
    case Op::Sub:
      if (cb && *cb == 0.0) return a;
      if (ca && *ca == 0.0) return -b;
      break;
    case Op::Mul:
      if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return Expr(0.0);
      if (ca && *ca == 1.0) return b;
      if (cb && *cb == 1.0) return a;
      break;
    case Op::Div:
      if (ca && *ca == 0.0) return Expr(0.0);
      if (cb && *cb == 1.0) return a;
      break;
    case Op::Pow:
      if (cb && *cb == 0.0) return Expr(1.0);
      if (cb && *cb == 1.0) return a;
      break;
    default:
      break;
  }
  auto node = std::make_shared<Node>();
  node->op = op;
  node->a = a.node_;
  if (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow) {
    node->b = b.node_;
  }
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make_node(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make_node(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make_node(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make_node(Op::Div, a, b); }
Expr operator-(const Expr& a) {
  if (a.node_->op == Op::Neg) return Expr::from_node(a.node_->a);
  return Expr::make_node(Op::Neg, a);
}
Expr pow(const Expr& base, const Expr& exponent) { return Expr::make_node(Op::Pow, base, exponent); }
Expr sin(const Expr& a) { return Expr::make_node(Op::Sin, a); }
Expr cos(const Expr& a) { return Expr::make_node(Op::Cos, a); }
Expr exp(const Expr& a) { return Expr::make_node(Op::Exp, a); }
Expr log(const Expr& a) { return Expr::make_node(Op::Log, a); }
Expr sqrt(const Expr& a) { return Expr::make_node(Op::Sqrt, a); }

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ExprParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
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
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return pow(base, unary());
    return base;
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double value = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return Expr(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "t") return Expr::variable(Var::t);
    if (name == "x1") return Expr::variable(Var::x1);
    if (name == "x2") return Expr::variable(Var::x2);
    if (name == "y1") return Expr::variable(Var::y1);
    if (name == "y2") return Expr::variable(Var::y2);
    if (name == "pi") return Expr(std::numbers::pi);
    Expr (*fn)(const Expr&) = nullptr;
    if (name == "sin") fn = &sin;
    if (name == "cos") fn = &cos;
    if (name == "exp") fn = &exp;
    if (name == "log") fn = &log;
    if (name == "sqrt") fn = &sqrt;
    if (!fn) {
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    if (!accept('(')) fail("expected '(' after " + name);
    Expr arg = expression();
    if (!accept(')')) fail("expected ')'");
    return fn(arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view text) { return Parser(text).parse(); }

}  // namespace twoscale
