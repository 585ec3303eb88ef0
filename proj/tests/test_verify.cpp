#include "twoscale/errors.hpp"
#include "twoscale/quadrature.hpp"
#include "twoscale/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace twoscale;

namespace {

Expr P(const char* text) { return Expr::parse(text); }

ModelParams coupled_params() {
  ModelParams p;
  p.theta = 0.5;
  p.d2 = 0.5;
  p.alpha = 0.5;
  p.b = TransferFn::saturating(1.0, 0.5);
  return p;
}

}  // namespace

TEST(Verify, ZeroExactSolutionHasZeroForcing) {
  auto ops = unit_square_ops(2, 2);
  const ExactSolution zero;
  const ModelParams p = zero.data(coupled_params());
  const auto loads = MmsForcing(zero, p, ops).loads(0.3, 0.2);
  EXPECT_TRUE(loads.macro.isZero(0.0));
  EXPECT_TRUE(loads.u.isZero(0.0));
  EXPECT_TRUE(loads.v.isZero(0.0));
  const auto f = mms_forcing(zero, p, *ops->micro, 0.1, Vec2(0.3, 0.4), Vec2(0.5, 0.5));
  EXPECT_EQ(f.f_U, 0.0);
  EXPECT_EQ(f.f_u, 0.0);
  EXPECT_EQ(f.f_v, 0.0);
}

TEST(Verify, SteadyMacroForcing) {
  auto ops = unit_square_ops(2, 2);
  ModelParams p = coupled_params();
  p.D = 1.7;
  p.b = TransferFn::linear_positive_part(0.0);
  const ExactSolution exact(P("x1*(1 - x1)"), Expr(0.0), {}, {});
  const auto f = mms_forcing(exact, p, *ops->micro, 0.0, Vec2(0.3, 0.8), Vec2(0.1, 0.1));
  EXPECT_NEAR(f.f_U, 2.0 * p.D, 1e-12);
}

TEST(Verify, PointwiseForcingMatchesHandDerivatives) {
  auto ops = unit_square_ops(2, 8);
  ModelParams p = coupled_params();
  p.k = 2.0;
  const ExactSolution exact = default_exact_solution();
  const double t = 0.2;
  const Vec2 x(0.3, 0.6), y(0.25, 0.5);
  const auto f = mms_forcing(exact, p, *ops->micro, t, x, y);
  const double pi = std::numbers::pi;
  const double e = std::exp(-t);
  // u = e (1 + x1 x2)(0.75 + 0.5 cos(pi y1) y2^2) + t sin(pi x1) y1^2
  const double a = 1 + x.x() * x.y();
  const double u = e * a * (0.75 + 0.5 * std::cos(pi * y.x()) * y.y() * y.y()) +
                   t * std::sin(pi * x.x()) * y.x() * y.x();
  const double ut = -e * a * (0.75 + 0.5 * std::cos(pi * y.x()) * y.y() * y.y()) +
                    std::sin(pi * x.x()) * y.x() * y.x();
  const double lap = e * a * 0.5 * (-pi * pi * std::cos(pi * y.x()) * y.y() * y.y() + 2 * std::cos(pi * y.x())) +
                     2 * t * std::sin(pi * x.x());
  const double v = e * (1 + 0.5 * std::sin(pi * x.x()) * x.y()) * (1 + y.x() * y.y());
  EXPECT_NEAR(f.f_u, ut - p.d1 * lap + p.k * u * v, 1e-12);
  EXPECT_NEAR(f.f_v, -v + p.alpha * p.k * u * v, 1e-12);
}

TEST(Verify, DiscreteExactSolutionIsReproduced) {
  // U in V_h, u and v bilinear in (x, y) and linear in t; b(U - u) = 0 and
  // eta = 0 along the solution.
  auto ops = unit_square_ops(3, 3);
  ModelParams p = coupled_params();
  const ExactSolution exact(P("1 + t + x1 + 2*x2"), P("1 + t + x1 + 2*x2"),
                            SeparableField({{P("5 + t"), P("1 + x1"), P("1 + y1")}}),
                            SeparableField({{P("-(1 + t)"), P("1 + x2"), P("1 + y2")}}));
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.05;
  cfg.cg.tol = 1e-13;
  const auto err = space_time_error(exact, p, ops, cfg);
  EXPECT_LT(err.U_H1, 1e-8);
  EXPECT_LT(err.u_L2H1y, 1e-8);
  EXPECT_LT(err.v_L2H1y, 1e-8);
}

TEST(Verify, ZeroDiscreteAgainstConstant) {
  auto ops = unit_square_ops(2, 2);
  const double c = 1.5, dt = 0.1;
  const ExactSolution exact(Expr{c}, Expr{c}, SeparableField({{Expr(c), Expr(1.0), Expr(1.0)}}),
                            SeparableField({{Expr(1.0), Expr(c), Expr(1.0)}}));
  ErrorAccumulator acc(exact, ops, dt);
  State s;
  s.U = Eigen::VectorXd::Zero(9);
  s.u = s.v = TwoScaleField(ops->macro, ops->micro);
  for (int i = 1; i <= 5; ++i) {
    s.t = i * dt;
    acc.add(s);
  }
  const auto e = acc.result();
  const double expected = c * std::sqrt(0.5);
  EXPECT_NEAR(e.U_L2, expected, 1e-12);
  EXPECT_NEAR(e.U_H1, expected, 1e-12);
  EXPECT_NEAR(e.u_L2, expected, 1e-12);
  EXPECT_NEAR(e.v_L2H1y, expected, 1e-12);
}

TEST(Verify, SeparableErrorsMatchDirectQuadrature) {
  auto macro = unit_square_ops(2, 3)->macro;
  auto micro = unit_square_ops(2, 3)->micro;
  const SeparableField f({{Expr(1.0), P("sin(pi*x1)"), P("cos(pi*y1)*y2")}, {Expr(1.0), P("x2^2"), P("exp(y1)")}});
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  TwoScaleCoeffs<double> beta(macro->n_dof(), micro->n_dof());
  for (Eigen::Index i = 0; i < beta.size(); ++i) beta.data()[i] = normal(rng);
  const auto [l2, h1] = SeparableErrors(f, macro, micro).squared_at(beta, 0.0);
  // Direct degree-6 tensor quadrature of (w_h - f)^2 and |grad_y (w_h - f)|^2.
  const TwoScaleField w(macro, micro, beta);
  const auto rule = triangle_rule(6);
  const Mesh2D& mx = macro->mesh();
  const Mesh2D& my = micro->mesh();
  double dl2 = 0.0, dh1 = 0.0;
  for (int tx = 0; tx < mx.n_triangles(); ++tx) {
    const auto& ix = mx.triangles()[tx];
    for (int ty = 0; ty < my.n_triangles(); ++ty) {
      const auto& iy = my.triangles()[ty];
      const auto grads = hat_gradients(my.vertices()[iy[0]], my.vertices()[iy[1]], my.vertices()[iy[2]]);
      for (const auto& qa : rule) {
        const Vec2 x = qa.bary[0] * mx.vertices()[ix[0]] + qa.bary[1] * mx.vertices()[ix[1]] + qa.bary[2] * mx.vertices()[ix[2]];
        for (const auto& qb : rule) {
          const Vec2 y = qb.bary[0] * my.vertices()[iy[0]] + qb.bary[1] * my.vertices()[iy[1]] + qb.bary[2] * my.vertices()[iy[2]];
          const double weight = qa.weight * mx.triangle_area(tx) * qb.weight * my.triangle_area(ty);
          Vec2 grad = Vec2::Zero();
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) grad += beta(ix[a], iy[b]) * qa.bary[a] * grads[b];
          }
          const double diff = w.value(tx, qa.bary, ty, qb.bary) - f.value(0.0, x, y);
          dl2 += weight * diff * diff;
          dh1 += weight * (grad - f.grad_y(0.0, x, y)).squaredNorm();
        }
      }
    }
  }
  EXPECT_NEAR(l2, dl2, 1e-10 * dl2);
  EXPECT_NEAR(h1, dh1, 1e-10 * dh1);
}

TEST(Verify, ErrorsInvariantUnderRenumbering) {
  const Vec2 lo(0, 0), hi(1, 1);
  const Mesh2D base = make_rect_mesh(lo, hi, 4, 4);
  std::vector<int> perm(base.n_vertices());
  for (int i = 0; i < base.n_vertices(); ++i) perm[i] = (7 * i + 3) % base.n_vertices();
  auto micro = std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(
      tag_boundary(make_rect_mesh(lo, hi, 4, 4), gamma_r_preset("top_edge", lo, hi))));
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.03;
  cfg.cg.tol = 1e-14;
  SpaceTimeErrors e[2];
  for (int i = 0; i < 2; ++i) {
    auto macro = std::make_shared<const P1Space>(
        std::make_shared<const Mesh2D>(i == 0 ? base : renumber_vertices(base, perm)));
    auto ops = std::make_shared<const CoupledOperators>(make_coupled_operators(macro, micro));
    e[i] = space_time_error(default_exact_solution(), coupled_params(), ops, cfg);
  }
  EXPECT_NEAR(e[0].U_H1, e[1].U_H1, 1e-12);
  EXPECT_NEAR(e[0].u_L2H1y, e[1].u_L2H1y, 1e-12);
  EXPECT_NEAR(e[0].v_L2, e[1].v_L2, 1e-12);
}

TEST(Verify, FittedRate) {
  const std::vector<double> h = {0.4, 0.2, 0.1};
  EXPECT_NEAR(fitted_rate(h, {3 * 0.16, 3 * 0.04, 3 * 0.01}), 2.0, 1e-12);
}

TEST(Verify, InterpolationOfDiscreteFunctionsSaturates) {
  const auto report = interpolation_rate_test(P("x1 + 2*x2"), SeparableField({{Expr(1.0), P("x1"), P("1 + y1")}}), 2, 3);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(report.saturated[i]) << i;
}

TEST(Verify, EocNeedsThreeLevels) {
  EocOptions o;
  o.levels = 2;
  EXPECT_THROW(run_eoc(default_exact_solution(), coupled_params(), o), PreconditionError);
}

TEST(Verify, DtRuleGuard) {
  EocOptions o;
  o.base_nx = 1;
  o.levels = 3;
  o.dt_power = 1.0;
  o.T = 0.01;
  const auto table = run_eoc(default_exact_solution(), coupled_params(), o);
  ASSERT_EQ(table.warnings.size(), 1u);
  EXPECT_EQ(table.rows.size(), 3u);
  std::ostringstream ss;
  table.write_csv(ss);
  EXPECT_EQ(ss.str().rfind("nx,h,dt,steps,e_U_H1", 0), 0u);
}

TEST(Verify, BoundsMonitor) {
  auto ops = unit_square_ops(3, 3);
  ModelParams p;
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.05;
  BoundsMonitor zero(ops, linf_bounds(0, 0, 0, 0), 1e-10);
  run(p, ops, cfg, {zero.observer()});
  EXPECT_EQ(zero.violations(), 0);
  EXPECT_EQ(zero.rows().size(), 6u);

  // Forcing U towards negative values.
  struct Negative : Forcing {
    std::shared_ptr<const CoupledOperators> ops;
    ForcingLoads loads(double, double) const override {
      ForcingLoads l;
      l.macro = -ops->wx;
      l.u = TwoScaleCoeffs<double>::Zero(ops->wx.size(), ops->wy.size());
      l.v = l.u;
      return l;
    }
  };
  auto neg = std::make_shared<Negative>();
  neg->ops = ops;
  cfg.forcing = neg;
  BoundsMonitor monitor(ops, linf_bounds(0, 0, 0, 0), 1e-10);
  run(p, ops, cfg, {monitor.observer()});
  EXPECT_EQ(monitor.violations(), 5);
  std::ostringstream ss;
  monitor.write_csv(ss);
  EXPECT_EQ(ss.str().rfind("step,t,min_U", 0), 0u);
}

TEST(Verify, TraceInequality) {
  auto ops = unit_square_ops(3, 4);
  const double kappa = 2.0;
  const auto constant = interpolate_two_scale(ops->macro, ops->micro, [&](const Vec2&, const Vec2&) { return kappa; });
  for (const auto& row : trace_inequality_check({constant}, {1.0, 0.1}, *ops)) {
    EXPECT_NEAR(row.constant, ops->gamma_r_length(), 1e-12);
  }
  const auto away = interpolate_two_scale(ops->macro, ops->micro,
                                          [](const Vec2&, const Vec2& y) { return y.y() < 0.5 ? 1.0 : 0.0; });
  EXPECT_EQ(trace_inequality_check({away}, {0.01}, *ops)[0].constant, 0.0);

  std::mt19937 rng(9);
  std::normal_distribution<double> normal;
  std::vector<TwoScaleField> samples;
  for (int i = 0; i < 20; ++i) {
    TwoScaleField w(ops->macro, ops->micro);
    for (Eigen::Index k = 0; k < w.coeffs().size(); ++k) w.coeffs().data()[k] = normal(rng);
    samples.push_back(w);
  }
  const auto rows = trace_inequality_check(samples, {1.0, 0.1, 0.01}, *ops);
  EXPECT_TRUE(std::isfinite(rows[2].constant));
  EXPECT_LE(rows[0].constant, rows[1].constant);
  EXPECT_LE(rows[1].constant, rows[2].constant);
  EXPECT_THROW(trace_inequality_check(samples, {0.0}, *ops), PreconditionError);
}

TEST(Verify, KConstant) {
  auto ops = unit_square_ops(4, 4);
  const ModelParams p = coupled_params();
  const ReactionMax m{2.0, 3.0};
  EXPECT_EQ(estimate_K(ExactSolution(), p, 0.1, 0.1, 0.1, m, *ops->macro, *ops->micro).value, 0.0);

  const auto exact = default_exact_solution();
  const auto K = estimate_K(exact, p, 0.1, 0.07, 0.03, m, *ops->macro, *ops->micro);
  EXPECT_GT(K.value, 0.0);
  ModelParams no_reaction = p;
  no_reaction.k = 0.0;
  const auto K0 = estimate_K(exact, no_reaction, 0.1, 0.07, 0.03, m, *ops->macro, *ops->micro);
  EXPECT_NEAR(K0.value, 0.5 * 0.03 * (K.u_X_sq + K.v_X_sq) + 0.5 * 0.07 * p.theta * K.U0_H2_sq, 1e-14);

  const double base = k_constant(0.1, 0.2, 0.5, 1.0, 0.5, 1, 1, 2, 3, 1.0, 2.0);
  EXPECT_GT(k_constant(0.1, 0.2, 0.6, 1.0, 0.5, 1, 1, 2, 3, 1.0, 2.0), base);
  EXPECT_GT(k_constant(0.1, 0.2, 0.5, 1.5, 0.5, 1, 1, 2, 3, 1.0, 2.0), base);
  EXPECT_GT(k_constant(0.1, 0.2, 0.5, 1.0, 0.7, 1, 1, 2, 3, 1.0, 2.0), base);
  EXPECT_GT(k_constant(0.1, 0.2, 0.5, 1.0, 0.5, 1, 1, 2, 3, 1.5, 2.0), base);

  // U0 = sin(pi x1) sin(pi x2) e^-t on the unit square: int |U0|_H2^2 is
  // (1/4)(1 + 2 pi^2 + 4 pi^4) per unit of e^-2t.
  const double pi = std::numbers::pi;
  const double expected = 0.25 * (1 + 2 * pi * pi + 4 * pi * pi * pi * pi) * 0.5 * (1 - std::exp(-0.2));
  auto fine = unit_square_ops(32, 2);
  EXPECT_NEAR(estimate_K(exact, p, 0.1, 0.07, 0.03, m, *fine->macro, *fine->micro).U0_H2_sq, expected, 1e-6 * expected);
}

TEST(Verify, SmallMeshCondition) {
  EXPECT_TRUE(small_mesh_condition(0.5, 1.0, 3.9));
  EXPECT_FALSE(small_mesh_condition(0.5, 1.0, 4.0));
}
