#pragma once

#include "twoscale/expr.hpp"
#include "twoscale/mesh.hpp"

#include <Eigen/Core>

#include <vector>

namespace twoscale {

/// One product term time(t) * macro(x) * micro(y).
struct SeparableTerm {
  Expr time;   // in t
  Expr macro;  // in x1, x2
  Expr micro;  // in y1, y2
};

/// Finite sum of separable terms with analytic derivatives. Used for
/// manufactured two-scale solutions and two-scale test functions.
class SeparableField {
 public:
  SeparableField() = default;
  explicit SeparableField(std::vector<SeparableTerm> terms);

  const std::vector<SeparableTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  double value(double t, const Vec2& x, const Vec2& y) const;
  double time_derivative(double t, const Vec2& x, const Vec2& y) const;
  Vec2 grad_y(double t, const Vec2& x, const Vec2& y) const;
  double laplacian_y(double t, const Vec2& x, const Vec2& y) const;

  /// Per-term factor values at time t.
  Eigen::VectorXd time_factors(double t) const;
  Eigen::VectorXd time_derivative_factors(double t) const;

  double macro_factor(std::size_t i, const Vec2& x) const;
  Vec2 macro_gradient(std::size_t i, const Vec2& x) const;
  /// (d11, d12, d22)
  Eigen::Vector3d macro_hessian(std::size_t i, const Vec2& x) const;
  double micro_factor(std::size_t i, const Vec2& y) const;
  Vec2 micro_gradient(std::size_t i, const Vec2& y) const;
  Eigen::Vector3d micro_hessian(std::size_t i, const Vec2& y) const;
  double micro_laplacian(std::size_t i, const Vec2& y) const;

 private:
  struct Derivatives {
    Expr dt;
    Expr dx1, dx2, dx11, dx12, dx22;
    Expr dy1, dy2, dy11, dy12, dy22;
  };
  std::vector<SeparableTerm> terms_;
  std::vector<Derivatives> derivs_;
};

}  // namespace twoscale
