#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twoscale {

/// Independent variables of data expressions: time, macro point (x1, x2) and
/// micro point (y1, y2).
enum class Var : int { t = 0, x1 = 1, x2 = 2, y1 = 3, y2 = 4 };

using ExprArgs = std::array<double, 5>;

class ExprParseError : public std::invalid_argument {
 public:
  ExprParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at column " + std::to_string(position + 1)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Immutable arithmetic expression with symbolic differentiation.
///
/// Grammar: numbers, the variables t x1 x2 y1 y2, the constant pi, binary
/// + - * / ^, unary minus, parentheses and the functions sin cos exp log sqrt.
/// Constructors fold constants and drop neutral elements, so derivatives stay
/// small.
class Expr {
 public:
  Expr();
  Expr(double value);  // NOLINT: implicit so that literals mix with expressions

  static Expr variable(Var v);
  static Expr parse(std::string_view text);

  double operator()(const ExprArgs& args) const;
  double operator()(double t, double x1, double x2, double y1 = 0.0, double y2 = 0.0) const {
    return (*this)(ExprArgs{t, x1, x2, y1, y2});
  }

  Expr diff(Var v) const;
  bool depends_on(Var v) const;
  std::optional<double> constant_value() const;
  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, const Expr& exponent);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sqrt(const Expr& a);

  enum class Op : int;
  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr from_node(std::shared_ptr<const Node> node) { return Expr(std::move(node)); }
  // Folds constants and neutral elements before allocating a node.
  static Expr make_node(Op op, const Expr& a, const Expr& b = Expr(0.0));
  static double evaluate(const Node& node, const ExprArgs& args);

  std::shared_ptr<const Node> node_;
};

}  // namespace twoscale
