#include "twoscale/quadrature.hpp"
#include "twoscale/twoscale.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace twoscale;

namespace {

const Vec2 kOrigin(0.0, 0.0);
const Vec2 kOne(1.0, 1.0);

std::shared_ptr<const P1Space> macro_space(int n, Vec2 lo = kOrigin, Vec2 hi = kOne) {
  return std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(make_rect_mesh(lo, hi, n, n)));
}

std::shared_ptr<const P1Space> micro_space(int n, Vec2 lo = kOrigin, Vec2 hi = kOne) {
  return std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(
      tag_boundary(make_rect_mesh(lo, hi, n, n), gamma_r_preset("top_edge", lo, hi))));
}

// Brute-force tensor quadrature: for every pair of triangles, a degree-4 rule
// on each factor, with hat functions evaluated from barycentric coordinates.
struct BruteForce {
  double l2_sq = 0.0;
  double h1y_sq = 0.0;
};

BruteForce brute_force(const TwoScaleField& w) {
  const Mesh2D& mx = w.macro_space().mesh();
  const Mesh2D& my = w.micro_space().mesh();
  BruteForce out;
  const auto rule = triangle_rule(4);
  for (int tx = 0; tx < mx.n_triangles(); ++tx) {
    const auto& ix = mx.triangles()[tx];
    for (int ty = 0; ty < my.n_triangles(); ++ty) {
      const auto& iy = my.triangles()[ty];
      const auto& v = my.vertices();
      // gradients of micro hats on ty from the 2x2 Jacobian
      Eigen::Matrix2d jac;
      jac << v[iy[1]] - v[iy[0]], v[iy[2]] - v[iy[0]];
      const Eigen::Matrix2d jinv_t = jac.inverse().transpose();
      const Vec2 g[3] = {jinv_t * Vec2(-1, -1), jinv_t * Vec2(1, 0), jinv_t * Vec2(0, 1)};
      for (const auto& qa : rule) {
        for (const auto& qb : rule) {
          const double weight = qa.weight * mx.triangle_area(tx) * qb.weight * my.triangle_area(ty);
          double value = 0.0;
          Vec2 grad = Vec2::Zero();
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              const double beta = w.coeffs()(ix[a], iy[b]);
              value += beta * qa.bary[a] * qb.bary[b];
              grad += beta * qa.bary[a] * g[b];
            }
          }
          out.l2_sq += weight * value * value;
          out.h1y_sq += weight * grad.squaredNorm();
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST(TwoScale, NormsOfTrivialFields) {
  auto mx = macro_space(2), my = micro_space(2);
  const auto Mx = assemble_mass(*mx), My = assemble_mass(*my), Ay = assemble_stiffness(*my);
  TwoScaleField zero(mx, my);
  EXPECT_EQ(ts_l2_norm(zero, Mx, My), 0.0);
  TwoScaleField one(mx, my, TwoScaleField::Coeffs::Ones(mx->n_dof(), my->n_dof()));
  EXPECT_NEAR(ts_l2_norm(one, Mx, My), 1.0, 1e-12);
  EXPECT_NEAR(ts_h1y_seminorm(one, Mx, Ay), 0.0, 1e-7);

  const auto fx = interpolate_two_scale(mx, my, [](const Vec2& x, const Vec2&) { return std::sin(3 * x.x()); });
  EXPECT_NEAR(ts_h1y_seminorm(fx, Mx, Ay), 0.0, 1e-7);
  const auto y = interpolate_two_scale(mx, my, [](const Vec2&, const Vec2& y) { return y.y(); });
  EXPECT_NEAR(ts_h1y_seminorm(y, Mx, Ay), 1.0, 1e-12);
}

TEST(TwoScale, KroneckerNormsMatchBruteForceQuadrature) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> normal;
  // Two-triangle and eight-triangle meshes on unequal rectangles.
  const std::pair<int, int> sizes[] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
  for (const auto& [nx, ny] : sizes) {
    auto mx = macro_space(nx, Vec2(-1.0, 0.0), Vec2(0.5, 2.0));
    auto my = micro_space(ny, Vec2(0.0, 0.0), Vec2(0.5, 0.25));
    const auto Mx = assemble_mass(*mx), My = assemble_mass(*my), Ay = assemble_stiffness(*my);
    for (int trial = 0; trial < 25; ++trial) {
      TwoScaleField w(mx, my);
      for (Eigen::Index i = 0; i < w.coeffs().size(); ++i) w.coeffs().data()[i] = normal(rng);
      const BruteForce oracle = brute_force(w);
      EXPECT_NEAR(ts_l2_norm(w, Mx, My), std::sqrt(oracle.l2_sq), 1e-12);
      EXPECT_NEAR(ts_h1y_seminorm(w, Mx, Ay), std::sqrt(oracle.h1y_sq), 1e-12);
    }
  }
}

TEST(TwoScale, NormsAcceptExpressions) {
  auto mx = macro_space(2), my = micro_space(2);
  const auto Mx = assemble_mass(*mx), My = assemble_mass(*my);
  const TwoScaleField::Coeffs a = TwoScaleField::Coeffs::Random(mx->n_dof(), my->n_dof());
  const TwoScaleField::Coeffs b = TwoScaleField::Coeffs::Random(mx->n_dof(), my->n_dof());
  const TwoScaleField::Coeffs diff = a - b;
  EXPECT_DOUBLE_EQ(ts_l2_norm(a - b, Mx, My), ts_l2_norm(diff, Mx, My));
  EXPECT_NEAR(ts_l2_norm(2.0 * a, Mx, My), 2.0 * ts_l2_norm(a, Mx, My), 1e-14);
}

TEST(TwoScale, CauchySchwarz) {
  auto mx = macro_space(3), my = micro_space(2);
  const auto Mx = assemble_mass(*mx), My = assemble_mass(*my);
  for (int trial = 0; trial < 100; ++trial) {
    const TwoScaleField::Coeffs a = TwoScaleField::Coeffs::Random(mx->n_dof(), my->n_dof());
    const TwoScaleField::Coeffs b = TwoScaleField::Coeffs::Random(mx->n_dof(), my->n_dof());
    EXPECT_LE(std::abs(ts_inner(a, b, Mx.matrix, My.matrix)),
              ts_l2_norm(a, Mx, My) * ts_l2_norm(b, Mx, My) + 1e-12);
  }
}

TEST(TwoScale, DimensionMismatchRejected) {
  auto mx = macro_space(2), my = micro_space(2);
  const auto Mx = assemble_mass(*mx), My = assemble_mass(*my);
  const TwoScaleField::Coeffs wrong = TwoScaleField::Coeffs::Ones(3, 3);
  EXPECT_THROW(ts_l2_norm(wrong, Mx, My), DimensionMismatch);
  EXPECT_THROW(TwoScaleField(mx, my, wrong), DimensionMismatch);
}

TEST(TwoScale, KroneckerSolveMatchesDenseSystem) {
  auto mx = macro_space(2), my = micro_space(2);
  const auto Mx = assemble_mass(*mx);
  SparseOperator K;
  K.matrix = assemble_stiffness(*my).matrix + assemble_mass(*my).matrix;
  K.symmetric = true;
  const TwoScaleField::Coeffs load = TwoScaleField::Coeffs::Random(mx->n_dof(), my->n_dof());
  const auto beta = solve_kronecker(Mx, K, load, {1e-14, 1000});
  // Row-major vec(beta) pairs with kron(Mx, K).
  const Eigen::MatrixXd dense_x = Eigen::MatrixXd(Mx.matrix), dense_y = Eigen::MatrixXd(K.matrix);
  const Eigen::Index n = dense_x.rows() * dense_y.rows();
  Eigen::MatrixXd kron(n, n);
  for (Eigen::Index i = 0; i < dense_x.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense_x.cols(); ++j) {
      kron.block(i * dense_y.rows(), j * dense_y.cols(), dense_y.rows(), dense_y.cols()) =
          dense_x(i, j) * dense_y;
    }
  }
  Eigen::VectorXd rhs(n), expected;
  for (Eigen::Index i = 0; i < load.rows(); ++i) rhs.segment(i * load.cols(), load.cols()) = load.row(i).transpose();
  expected = kron.ldlt().solve(rhs);
  for (Eigen::Index i = 0; i < load.rows(); ++i) {
    EXPECT_LT((beta.row(i).transpose() - expected.segment(i * load.cols(), load.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TwoScale, RieszReproducesDiscreteTensorFunctions) {
  auto mx = macro_space(3), my = micro_space(3);
  // xi(x) = nodal hat of macro vertex 5 times a linear function of y.
  const Mesh2D& mesh = mx->mesh();
  Eigen::VectorXd hat = Eigen::VectorXd::Zero(mx->n_dof());
  hat[5] = 1.0;
  auto xi = [&](const Vec2& x) {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const auto& v = mesh.vertices();
      Eigen::Matrix2d jac;
      jac << v[tri[1]] - v[tri[0]], v[tri[2]] - v[tri[0]];
      const Vec2 s = jac.inverse() * (x - v[tri[0]]);
      if (s.minCoeff() >= -1e-12 && s.sum() <= 1 + 1e-12) {
        return mx->value(hat, t, {1 - s.sum(), s.x(), s.y()});
      }
    }
    return 0.0;
  };
  auto lin = [](const Vec2& y) { return 2.0 - y.x() + 0.5 * y.y(); };
  const auto w = micro_macro_riesz([&](const Vec2& x, const Vec2& y) { return xi(x) * lin(y); },
                                   [&](const Vec2& x, const Vec2&) { return Vec2(-xi(x), 0.5 * xi(x)); },
                                   mx, my, {1e-14, 1000});
  const auto expected = interpolate_two_scale(mx, my, [&](const Vec2& x, const Vec2& y) {
    return (x - mesh.vertices()[5]).norm() < 1e-12 ? lin(y) : 0.0;
  });
  EXPECT_LT((w.coeffs() - expected.coeffs()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TwoScale, SeparableRieszMatchesGenericPath) {
  auto mx = macro_space(2), my = micro_space(3);
  const SeparableField w({{Expr::parse("exp(-t)"), Expr::parse("sin(pi*x1)*x2"), Expr::parse("cos(pi*y1) + y2^2")},
                          {Expr(1.0), Expr::parse("1 + x1"), Expr::parse("y1*y2")}});
  const double t = 0.3;
  const auto fast = micro_macro_riesz(w, t, mx, my, {1e-14, 1000});
  const auto slow = micro_macro_riesz(
      [&](const Vec2& x, const Vec2& y) { return w.value(t, x, y); },
      [&](const Vec2& x, const Vec2& y) { return w.grad_y(t, x, y); }, mx, my, {1e-14, 1000});
  EXPECT_LT((fast.coeffs() - slow.coeffs()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(TwoScale, TraceValues) {
  auto mx = macro_space(2), my = micro_space(2);
  const auto kappa = interpolate_two_scale(mx, my, [](const Vec2&, const Vec2&) { return 1.75; });
  EXPECT_TRUE((trace_values_on_gamma_r(kappa, 4).array() == 1.75).all());
  const auto y = interpolate_two_scale(mx, my, [](const Vec2&, const Vec2& y) { return y.y(); });
  EXPECT_TRUE(trace_values_on_gamma_r(y, 0).isOnes());
  EXPECT_THROW(trace_values_on_gamma_r(y, 9), PreconditionError);
  EXPECT_THROW(trace_values_on_gamma_r(y, -1), PreconditionError);
}

TEST(TwoScale, TraceMatchesDirectEvaluation) {
  auto mx = macro_space(2), my = micro_space(3);
  TwoScaleField w(mx, my, TwoScaleField::Coeffs::Random(mx->n_dof(), my->n_dof()));
  const Mesh2D& mesh = my->mesh();
  for (int j = 0; j < w.n_macro(); ++j) {
    const Eigen::VectorXd trace = trace_values_on_gamma_r(w, j);
    int i = 0;
    for (int k = 0; k < mesh.n_vertices(); ++k) {
      if (mesh.vertices()[k].y() != 1.0) continue;
      // sum_k beta_jk eta_k evaluated at vertex k: only eta_k is nonzero there
      double direct = 0.0;
      for (int kk = 0; kk < mesh.n_vertices(); ++kk) direct += w.coeffs()(j, kk) * (kk == k ? 1.0 : 0.0);
      EXPECT_EQ(trace[i++], direct);
    }
    EXPECT_EQ(i, trace.size());
  }
}

TEST(TwoScale, CsvSnapshot) {
  auto mx = macro_space(1), my = micro_space(1);
  const auto w = interpolate_two_scale(mx, my, [](const Vec2& x, const Vec2& y) { return x.x() + 2 * y.y(); });
  std::ostringstream ss;
  write_field_csv(ss, w);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("macro_node,micro_node,value\n0,0,0\n", 0), 0u);
  EXPECT_NE(text.find("\n3,3,3\n"), std::string::npos);
}
