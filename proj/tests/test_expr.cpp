#include "twoscale/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace twoscale;

TEST(Expr, EvaluatesArithmeticAndPrecedence) {
  EXPECT_DOUBLE_EQ(Expr::parse("1 + 2 * 3")(0, 0, 0), 7.0);
  EXPECT_DOUBLE_EQ(Expr::parse("(1 + 2) * 3")(0, 0, 0), 9.0);
  EXPECT_DOUBLE_EQ(Expr::parse("2^3^2")(0, 0, 0), 512.0);
  EXPECT_DOUBLE_EQ(Expr::parse("-2^2")(0, 0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expr::parse("8 / 4 / 2")(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(Expr::parse("1.5e-1 * 2")(0, 0, 0), 0.3);
}

TEST(Expr, VariablesAndFunctions) {
  const Expr e = Expr::parse("exp(-t) * sin(pi*x1) * cos(pi*y2) + x2*y1 + sqrt(4) + log(1)");
  const double t = 0.3, x1 = 0.2, x2 = 0.7, y1 = 0.9, y2 = 0.4;
  const double pi = std::numbers::pi;
  EXPECT_NEAR(e(t, x1, x2, y1, y2),
              std::exp(-t) * std::sin(pi * x1) * std::cos(pi * y2) + x2 * y1 + 2.0, 1e-15);
  EXPECT_TRUE(e.depends_on(Var::t));
  EXPECT_FALSE(Expr::parse("x1 + y1")(ExprArgs{}) != 0.0);
  EXPECT_FALSE(Expr::parse("x1*y1").depends_on(Var::x2));
}

TEST(Expr, ParseErrorsCarryPosition) {
  EXPECT_THROW(Expr::parse("1 +"), ExprParseError);
  EXPECT_THROW(Expr::parse("foo(1)"), ExprParseError);
  EXPECT_THROW(Expr::parse("(x1"), ExprParseError);
  EXPECT_THROW(Expr::parse("x1 $ 2"), ExprParseError);
  try {
    Expr::parse("x1 + z");
  } catch (const ExprParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Expr, ConstantFolding) {
  EXPECT_EQ(Expr::parse("2 * 3 + 1").constant_value(), 7.0);
  EXPECT_EQ(Expr::parse("0 * sin(x1)").constant_value(), 0.0);
  EXPECT_EQ(Expr::parse("x1 * 1 + 0").str(), "x1");
  EXPECT_EQ(Expr::parse("x1^3").diff(Var::y1).constant_value(), 0.0);
}

TEST(Expr, DerivativesMatchCentralDifferences) {
  const char* cases[] = {
      "exp(-2*t) * sin(pi*x1) * sin(pi*x2)",
      "x1^3 * y2 - cos(y1*y2) / (2 + x2)",
      "sqrt(1 + x1^2 + y1^2) * log(2 + t)",
      "(1 + x1)^(1 + y2)",
  };
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  const double step = 1e-5;
  for (const char* text : cases) {
    const Expr e = Expr::parse(text);
    for (int v = 0; v < 5; ++v) {
      const Expr d = e.diff(static_cast<Var>(v));
      for (int trial = 0; trial < 5; ++trial) {
        ExprArgs p{u(rng), u(rng), u(rng), u(rng), u(rng)};
        ExprArgs plus = p, minus = p;
        plus[v] += step;
        minus[v] -= step;
        const double fd = (e(plus) - e(minus)) / (2 * step);
        EXPECT_NEAR(d(p), fd, 1e-7 * std::max(1.0, std::abs(fd))) << text << " d/dvar" << v;
      }
    }
  }
}

TEST(Expr, PrintedFormReparses) {
  const Expr e = Expr::parse("-exp(-t) * (x1 - 0.25)^2 / (1 + y1) - 3");
  const Expr back = Expr::parse(e.str());
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    ExprArgs p{u(rng), u(rng), u(rng), std::abs(u(rng)), u(rng)};
    EXPECT_DOUBLE_EQ(back(p), e(p));
  }
}
