#include "twoscale/quadrature.hpp"
#include "twoscale/verify.hpp"

namespace twoscale {

namespace {

ExprArgs args(double t, const Vec2& x) { return {t, x.x(), x.y(), 0.0, 0.0}; }

}  // namespace

ExactSolution::ExactSolution() : ExactSolution(Expr(0.0), Expr(0.0), {}, {}) {}

ExactSolution::ExactSolution(Expr U, Expr U_ext, SeparableField u, SeparableField v)
    : U_(std::move(U)), U_ext_(std::move(U_ext)), u_(std::move(u)), v_(std::move(v)) {
  for (const Expr* e : {&U_, &U_ext_}) {
    if (e->depends_on(Var::y1) || e->depends_on(Var::y2)) {
      throw PreconditionError("macro expressions must not depend on y");
    }
  }
  U0_ = U_ - U_ext_;
  dUdt_ = U_.diff(Var::t);
  dUdx1_ = U_.diff(Var::x1);
  dUdx2_ = U_.diff(Var::x2);
  lapU_ = dUdx1_.diff(Var::x1) + dUdx2_.diff(Var::x2);
  dU0dx1_ = U0_.diff(Var::x1);
  dU0dx2_ = U0_.diff(Var::x2);
  dU0dx11_ = dU0dx1_.diff(Var::x1);
  dU0dx12_ = dU0dx1_.diff(Var::x2);
  dU0dx22_ = dU0dx2_.diff(Var::x2);
}

double ExactSolution::U(double t, const Vec2& x) const { return U_(args(t, x)); }
double ExactSolution::dU_dt(double t, const Vec2& x) const { return dUdt_(args(t, x)); }
Vec2 ExactSolution::grad_U(double t, const Vec2& x) const {
  const auto a = args(t, x);
  return {dUdx1_(a), dUdx2_(a)};
}
double ExactSolution::laplacian_U(double t, const Vec2& x) const { return lapU_(args(t, x)); }
double ExactSolution::U_ext(double t, const Vec2& x) const { return U_ext_(args(t, x)); }
double ExactSolution::U0(double t, const Vec2& x) const { return U0_(args(t, x)); }
Vec2 ExactSolution::grad_U0(double t, const Vec2& x) const {
  const auto a = args(t, x);
  return {dU0dx1_(a), dU0dx2_(a)};
}
Eigen::Vector3d ExactSolution::hessian_U0(double t, const Vec2& x) const {
  const auto a = args(t, x);
  return {dU0dx11_(a), dU0dx12_(a), dU0dx22_(a)};
}

ModelParams ExactSolution::data(ModelParams base) const {
  const Expr ext = U_ext_, U = U_;
  const SeparableField u = u_, v = v_;
  base.U_ext = [ext](double t, const Vec2& x) { return ext(args(t, x)); };
  base.U_I = [U](const Vec2& x) { return U(args(0.0, x)); };
  base.u_I = [u](const Vec2& x, const Vec2& y) { return u.value(0.0, x, y); };
  base.v_I = [v](const Vec2& x, const Vec2& y) { return v.value(0.0, x, y); };
  return base;
}

ExactSolution default_exact_solution() {
  const auto P = [](const char* text) { return Expr::parse(text); };
  SeparableField u({{P("exp(-t)"), P("1 + x1*x2"), P("0.75 + 0.5*cos(pi*y1)*y2^2")},
                    {P("t"), P("sin(pi*x1)"), P("y1^2")}});
  SeparableField v({{P("exp(-t)"), P("1 + 0.5*sin(pi*x1)*x2"), P("1 + y1*y2")}});
  return ExactSolution(P("exp(-t)*(1 + sin(pi*x1)*sin(pi*x2))"), P("exp(-t)"), std::move(u),
                       std::move(v));
}

namespace {

// Values and gradients at the quadrature points of a triangle rule, for
// exact factors and their nodal interpolants.
struct PointTable {
  std::vector<double> weights;
  Eigen::MatrixXd f, gx, gy;     // exact factor, gradient components (m x nq)
  Eigen::MatrixXd If, Igx, Igy;  // interpolant
};

template <typename Value, typename Grad>
PointTable point_table(const P1Space& space, std::size_t m, const Value& value, const Grad& grad,
                       int degree) {
  const Mesh2D& mesh = space.mesh();
  const auto rule = triangle_rule(degree);
  const auto nq = static_cast<Eigen::Index>(mesh.n_triangles() * rule.size());
  PointTable t;
  for (auto* mat : {&t.f, &t.gx, &t.gy, &t.If, &t.Igx, &t.Igy}) mat->resize(m, nq);
  t.weights.reserve(nq);
  Eigen::MatrixXd nodal(m, mesh.n_vertices());
  for (std::size_t i = 0; i < m; ++i) {
    for (int k = 0; k < mesh.n_vertices(); ++k) nodal(i, k) = value(i, mesh.vertices()[k]);
  }
  Eigen::Index id = 0;
  for (int tri = 0; tri < mesh.n_triangles(); ++tri) {
    const auto& ids = mesh.triangles()[tri];
    const auto& v = mesh.vertices();
    const auto hats = hat_gradients(v[ids[0]], v[ids[1]], v[ids[2]]);
    for (const auto& q : rule) {
      const Vec2 p = q.bary[0] * v[ids[0]] + q.bary[1] * v[ids[1]] + q.bary[2] * v[ids[2]];
      t.weights.push_back(q.weight * mesh.triangle_area(tri));
      for (std::size_t i = 0; i < m; ++i) {
        t.f(i, id) = value(i, p);
        const Vec2 g = grad(i, p);
        t.gx(i, id) = g.x();
        t.gy(i, id) = g.y();
        double iv = 0.0;
        Vec2 ig = Vec2::Zero();
        for (int a = 0; a < 3; ++a) {
          iv += q.bary[a] * nodal(i, ids[a]);
          ig += nodal(i, ids[a]) * hats[a];
        }
        t.If(i, id) = iv;
        t.Igx(i, id) = ig.x();
        t.Igy(i, id) = ig.y();
      }
      ++id;
    }
  }
  return t;
}

// sum_q w_q A(i, q) B(l, q)
Eigen::MatrixXd weighted(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const std::vector<double>& w) {
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), w.size());
  return A * wv.asDiagonal() * B.transpose();
}

}  // namespace

SeparableErrors::SeparableErrors(const SeparableField& field, std::shared_ptr<const P1Space> macro,
                                 std::shared_ptr<const P1Space> micro, int degree)
    : field_(field) {
  mx_ = assemble_mass(*macro);
  my_ = assemble_mass(*micro);
  ay_ = assemble_stiffness(*micro);
  const std::size_t m = field_.size();
  const auto mi = static_cast<Eigen::Index>(m);
  a_.resize(mi, macro->n_dof());
  b_.resize(mi, micro->n_dof());
  for (Eigen::Index i = 0; i < mi; ++i) {
    for (int k = 0; k < macro->n_dof(); ++k) a_(i, k) = field_.macro_factor(i, macro->mesh().vertices()[k]);
    for (int k = 0; k < micro->n_dof(); ++k) b_(i, k) = field_.micro_factor(i, micro->mesh().vertices()[k]);
  }
  lx_.resize(mi, macro->n_dof());
  lax_.resize(mi, macro->n_dof());
  lby_.resize(mi, micro->n_dof());
  gby_.resize(mi, micro->n_dof());
  for (Eigen::Index i = 0; i < mi; ++i) {
    const Eigen::VectorXd ai = a_.row(i).transpose(), bi = b_.row(i).transpose();
    lx_.row(i) = load_vector(*macro, [&](const Vec2& x) { return field_.macro_factor(i, x); }, degree).transpose();
    // int (I X_i - X_i) xi_j = Mx a_i - load(X_i)
    lax_.row(i) = (mx_.matrix * ai).transpose() - lx_.row(i);
    lby_.row(i) = (my_.matrix * bi - load_vector(*micro, [&](const Vec2& y) { return field_.micro_factor(i, y); }, degree)).transpose();
    gby_.row(i) = (ay_.matrix * bi - gradient_load_vector(*micro, [&](const Vec2& y) { return field_.micro_gradient(i, y); }, degree)).transpose();
  }
  mb_ = (my_.matrix * b_.transpose()).transpose();
  ab_ = (ay_.matrix * b_.transpose()).transpose();

  const PointTable x = point_table(
      *macro, m, [&](std::size_t i, const Vec2& p) { return field_.macro_factor(i, p); },
      [&](std::size_t i, const Vec2& p) { return field_.macro_gradient(i, p); }, degree);
  const PointTable y = point_table(
      *micro, m, [&](std::size_t i, const Vec2& p) { return field_.micro_factor(i, p); },
      [&](std::size_t i, const Vec2& p) { return field_.micro_gradient(i, p); }, degree);
  const Eigen::MatrixXd dx = x.If - x.f;
  const Eigen::MatrixXd dy = y.If - y.f, dgx = y.Igx - y.gx, dgy = y.Igy - y.gy;
  const Eigen::MatrixXd Ax = weighted(dx, dx, x.weights);
  const Eigen::MatrixXd Bx = weighted(dx, x.f, x.weights);  // (a_i - x_i, x_l)
  const Eigen::MatrixXd Cx = weighted(x.f, x.f, x.weights);
  const Eigen::MatrixXd By = b_ * my_.matrix * b_.transpose();
  const Eigen::MatrixXd Dy = weighted(y.If, dy, y.weights);  // (b_i, b_l - y_l)
  const Eigen::MatrixXd Ey = weighted(dy, dy, y.weights);
  const Eigen::MatrixXd Gy = b_ * ay_.matrix * b_.transpose();
  const Eigen::MatrixXd Hy = weighted(y.Igx, dgx, y.weights) + weighted(y.Igy, dgy, y.weights);
  const Eigen::MatrixXd Jy = weighted(dgx, dgx, y.weights) + weighted(dgy, dgy, y.weights);
  rest_l2_ = Ax.cwiseProduct(By) + Bx.cwiseProduct(Dy) + Bx.transpose().cwiseProduct(Dy.transpose()) +
             Cx.cwiseProduct(Ey);
  rest_h1_ = Ax.cwiseProduct(Gy) + Bx.cwiseProduct(Hy) + Bx.transpose().cwiseProduct(Hy.transpose()) +
             Cx.cwiseProduct(Jy);
}

std::pair<double, double> SeparableErrors::squared(const TwoScaleCoeffs<double>& beta,
                                                   const Eigen::VectorXd& tau) const {
  // d = beta - I u
  const TwoScaleCoeffs<double> d = beta - a_.transpose() * tau.asDiagonal() * b_;
  const Eigen::MatrixXd dax = lax_ * d;  // m x Ny
  const Eigen::MatrixXd dx = lx_ * d;
  double cross_l2 = 0.0, cross_h1 = 0.0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    cross_l2 += tau[i] * (dax.row(i).dot(mb_.row(i)) + dx.row(i).dot(lby_.row(i)));
    cross_h1 += tau[i] * (dax.row(i).dot(ab_.row(i)) + dx.row(i).dot(gby_.row(i)));
  }
  const double l2 = ts_inner(d, d, mx_.matrix, my_.matrix) + 2.0 * cross_l2 + tau.dot(rest_l2_ * tau);
  const double h1 = ts_inner(d, d, mx_.matrix, ay_.matrix) + 2.0 * cross_h1 + tau.dot(rest_h1_ * tau);
  return {std::max(l2, 0.0), std::max(h1, 0.0)};
}

std::pair<double, double> SeparableErrors::squared_at(const TwoScaleCoeffs<double>& beta,
                                                      double t) const {
  return squared(beta, field_.time_factors(t));
}

}  // namespace twoscale
