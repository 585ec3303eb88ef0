#include "twoscale/separable.hpp"

#include "twoscale/errors.hpp"

namespace twoscale {

namespace {
ExprArgs macro_args(const Vec2& x) { return {0.0, x.x(), x.y(), 0.0, 0.0}; }
ExprArgs micro_args(const Vec2& y) { return {0.0, 0.0, 0.0, y.x(), y.y()}; }
}  // namespace

SeparableField::SeparableField(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    const bool time_ok = !term.time.depends_on(Var::x1) && !term.time.depends_on(Var::x2) &&
                         !term.time.depends_on(Var::y1) && !term.time.depends_on(Var::y2);
    const bool macro_ok = !term.macro.depends_on(Var::t) && !term.macro.depends_on(Var::y1) &&
                          !term.macro.depends_on(Var::y2);
    const bool micro_ok = !term.micro.depends_on(Var::t) && !term.micro.depends_on(Var::x1) &&
                          !term.micro.depends_on(Var::x2);
    if (!time_ok || !macro_ok || !micro_ok) {
      throw PreconditionError("separable term factor depends on a foreign variable");
    }
    Derivatives d;
    d.dt = term.time.diff(Var::t);
    d.dx1 = term.macro.diff(Var::x1);
    d.dx2 = term.macro.diff(Var::x2);
    d.dx11 = d.dx1.diff(Var::x1);
    d.dx12 = d.dx1.diff(Var::x2);
    d.dx22 = d.dx2.diff(Var::x2);
    d.dy1 = term.micro.diff(Var::y1);
    d.dy2 = term.micro.diff(Var::y2);
    d.dy11 = d.dy1.diff(Var::y1);
    d.dy12 = d.dy1.diff(Var::y2);
    d.dy22 = d.dy2.diff(Var::y2);
    derivs_.push_back(std::move(d));
  }
}

Eigen::VectorXd SeparableField::time_factors(double t) const {
  Eigen::VectorXd out(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) out[i] = terms_[i].time(ExprArgs{t, 0, 0, 0, 0});
  return out;
}

Eigen::VectorXd SeparableField::time_derivative_factors(double t) const {
  Eigen::VectorXd out(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) out[i] = derivs_[i].dt(ExprArgs{t, 0, 0, 0, 0});
  return out;
}

double SeparableField::macro_factor(std::size_t i, const Vec2& x) const {
  return terms_[i].macro(macro_args(x));
}

Vec2 SeparableField::macro_gradient(std::size_t i, const Vec2& x) const {
  const auto a = macro_args(x);
  return {derivs_[i].dx1(a), derivs_[i].dx2(a)};
}

Eigen::Vector3d SeparableField::macro_hessian(std::size_t i, const Vec2& x) const {
  const auto a = macro_args(x);
  return {derivs_[i].dx11(a), derivs_[i].dx12(a), derivs_[i].dx22(a)};
}

double SeparableField::micro_factor(std::size_t i, const Vec2& y) const {
  return terms_[i].micro(micro_args(y));
}

Vec2 SeparableField::micro_gradient(std::size_t i, const Vec2& y) const {
  const auto a = micro_args(y);
  return {derivs_[i].dy1(a), derivs_[i].dy2(a)};
}

Eigen::Vector3d SeparableField::micro_hessian(std::size_t i, const Vec2& y) const {
  const auto a = micro_args(y);
  return {derivs_[i].dy11(a), derivs_[i].dy12(a), derivs_[i].dy22(a)};
}

double SeparableField::micro_laplacian(std::size_t i, const Vec2& y) const {
  const auto a = micro_args(y);
  return derivs_[i].dy11(a) + derivs_[i].dy22(a);
}

double SeparableField::value(double t, const Vec2& x, const Vec2& y) const {
  double sum = 0.0;
  const Eigen::VectorXd tau = time_factors(t);
  for (std::size_t i = 0; i < terms_.size(); ++i) sum += tau[i] * macro_factor(i, x) * micro_factor(i, y);
  return sum;
}

double SeparableField::time_derivative(double t, const Vec2& x, const Vec2& y) const {
  double sum = 0.0;
  const Eigen::VectorXd dtau = time_derivative_factors(t);
  for (std::size_t i = 0; i < terms_.size(); ++i) sum += dtau[i] * macro_factor(i, x) * micro_factor(i, y);
  return sum;
}

Vec2 SeparableField::grad_y(double t, const Vec2& x, const Vec2& y) const {
  Vec2 sum = Vec2::Zero();
  const Eigen::VectorXd tau = time_factors(t);
  for (std::size_t i = 0; i < terms_.size(); ++i) sum += tau[i] * macro_factor(i, x) * micro_gradient(i, y);
  return sum;
}

double SeparableField::laplacian_y(double t, const Vec2& x, const Vec2& y) const {
  double sum = 0.0;
  const Eigen::VectorXd tau = time_factors(t);
  for (std::size_t i = 0; i < terms_.size(); ++i) sum += tau[i] * macro_factor(i, x) * micro_laplacian(i, y);
  return sum;
}

}  // namespace twoscale
