#include "twoscale/errors.hpp"
#include "twoscale/fem.hpp"
#include "twoscale/quadrature.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace twoscale;

namespace {

const Vec2 kOrigin(0.0, 0.0);
const Vec2 kOne(1.0, 1.0);
constexpr double kPi = std::numbers::pi;

P1Space unit_space(int n) {
  return P1Space(std::make_shared<const Mesh2D>(make_rect_mesh(kOrigin, kOne, n, n)));
}

P1Space micro_space(int n) {
  return P1Space(std::make_shared<const Mesh2D>(
      tag_boundary(make_rect_mesh(kOrigin, kOne, n, n), gamma_r_preset("top_edge", kOrigin, kOne))));
}

double max_abs(const SparseMatrix& m) {
  double out = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

}  // namespace

TEST(Quadrature, TriangleRulesIntegrateMonomialsExactly) {
  // Reference triangle: int x^a y^b = a! b! / (a+b+2)!
  for (int degree : {2, 4, 6}) {
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double sum = 0.0;
        for (const auto& qp : triangle_rule(degree)) {
          sum += 0.5 * qp.weight * std::pow(qp.bary[1], a) * std::pow(qp.bary[2], b);
        }
        const double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        EXPECT_NEAR(sum, exact, 1e-15) << "degree " << degree << " monomial " << a << "," << b;
      }
    }
  }
}

TEST(Quadrature, LineRulesIntegrateMonomialsExactly) {
  for (int n = 1; n <= 5; ++n) {
    for (int p = 0; p < 2 * n; ++p) {
      double sum = 0.0;
      for (const auto& qp : line_rule(n)) sum += qp.weight * std::pow(qp.s, p);
      EXPECT_NEAR(sum, 1.0 / (p + 1), 1e-15);
    }
  }
}

TEST(Fem, ReferenceElementMassMatchesGaussOracle) {
  const Vec2 a(0, 0), b(1, 0), c(0, 1);
  // Hat functions on the reference triangle, integrated with a 3-point degree-2 rule.
  auto hat = [](int i, double x, double y) { return i == 0 ? 1 - x - y : (i == 1 ? x : y); };
  const double pts[3][2] = {{1.0 / 6, 1.0 / 6}, {2.0 / 3, 1.0 / 6}, {1.0 / 6, 2.0 / 3}};
  Eigen::Matrix3d oracle = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (const auto& p : pts) oracle(i, j) += (0.5 / 3.0) * hat(i, p[0], p[1]) * hat(j, p[0], p[1]);
    }
  }
  const Eigen::Matrix3d m = element_mass(a, b, c);
  EXPECT_LT((m - oracle).cwiseAbs().maxCoeff(), 1e-16);
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  EXPECT_LT((m - 0.5 / 12.0 * expected).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Fem, ReferenceElementStiffness) {
  Eigen::Matrix3d expected;
  expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  expected *= 0.5;
  const Eigen::Matrix3d k = element_stiffness(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
  EXPECT_LT((k - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Fem, MassPartitionOfUnityAndSymmetry) {
  for (int n : {1, 2, 5, 8}) {
    const P1Space space = unit_space(n);
    const SparseOperator m = assemble_mass(space);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(space.n_dof());
    EXPECT_NEAR(one.dot(m.matrix * one), 1.0, 1e-12);
    EXPECT_EQ(max_abs(m.matrix - SparseMatrix(m.matrix.transpose())), 0.0);
    EXPECT_TRUE(m.symmetric);
    // Positive definite: a Cholesky-free check via CG on a random rhs.
    EXPECT_NO_THROW(cg_solve(m, Eigen::VectorXd::Random(space.n_dof())));
  }
}

TEST(Fem, StiffnessKernelAndLinearEnergy) {
  const P1Space space = unit_space(6);
  const SparseOperator a = assemble_stiffness(space);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(space.n_dof());
  EXPECT_LT((a.matrix * one).cwiseAbs().maxCoeff(), 1e-13);
  const Eigen::VectorXd fx = interpolate_nodal(space, [](const Vec2& p) { return p.x(); });
  EXPECT_NEAR(fx.dot(a.matrix * fx), 1.0, 1e-12);
  EXPECT_EQ(max_abs(a.matrix - SparseMatrix(a.matrix.transpose())), 0.0);
}

TEST(Fem, BoundaryMass) {
  const P1Space space = micro_space(4);
  const SparseOperator b = assemble_boundary_mass(space, BoundaryTag::GammaR);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(space.n_dof());
  EXPECT_NEAR(one.dot(b.matrix * one), 1.0, 1e-12);
  const auto gamma_r = space.mesh().tagged_vertices(BoundaryTag::GammaR);
  for (int k = 0; k < b.matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(b.matrix, k); it; ++it) {
      EXPECT_TRUE(std::binary_search(gamma_r.begin(), gamma_r.end(), static_cast<int>(it.row())));
    }
  }
  EXPECT_THROW(assemble_boundary_mass(space, BoundaryTag::MacroDirichlet), InvalidTag);
  EXPECT_THROW(assemble_boundary_mass(unit_space(2), BoundaryTag::GammaR), InvalidTag);
}

TEST(Fem, SingleEdgeBoundaryBlock) {
  // Edge of length L: int_0^L phi_p phi_q ds from exact 1D hat products.
  const double length = 0.75;
  const double pp = length / 3.0, pq = length / 6.0;
  const Eigen::Matrix2d m = edge_mass(length);
  EXPECT_NEAR(m(0, 0), pp, 1e-16);
  EXPECT_NEAR(m(0, 1), pq, 1e-16);
  EXPECT_NEAR(m(1, 1), pp, 1e-16);

  const P1Space space = micro_space(1);
  const SparseOperator b = assemble_boundary_mass(space, BoundaryTag::GammaR);
  EXPECT_NEAR(b.matrix.coeff(2, 2), 1.0 / 3.0, 1e-16);
  EXPECT_NEAR(b.matrix.coeff(2, 3), 1.0 / 6.0, 1e-16);
}

TEST(Fem, LumpedMassIsRowSum) {
  const P1Space space = unit_space(3);
  const SparseOperator m = assemble_mass(space);
  const Eigen::VectorXd w = lumped_mass(m);
  EXPECT_EQ(w, m.matrix * Eigen::VectorXd::Ones(space.n_dof()));
  EXPECT_TRUE((w.array() > 0).all());
}

TEST(Fem, AssemblyIndependentOfTriangleOrder) {
  const P1Space space = unit_space(7);
  std::vector<int> order(space.mesh().n_triangles());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(42));
  EXPECT_LT(max_abs(assemble_mass(space).matrix - assemble_mass(space, &order).matrix), 1e-14);
  EXPECT_LT(max_abs(assemble_stiffness(space).matrix - assemble_stiffness(space, &order).matrix),
            1e-14);
}

TEST(Fem, InterpolateNodal) {
  const P1Space space = unit_space(3);
  const Eigen::VectorXd ones = interpolate_nodal(space, [](const Vec2&) { return 1.0; });
  EXPECT_TRUE(ones.isOnes());
  const Eigen::VectorXd xs = interpolate_nodal(space, [](const Vec2& p) { return p.x(); });
  for (int i = 0; i < space.n_dof(); ++i) EXPECT_EQ(xs[i], space.mesh().vertices()[i].x());
}

TEST(Fem, InterpolationErrorIsSecondOrder) {
  auto f = [](const Vec2& p) { return std::sin(kPi * p.x()) * std::sin(kPi * p.y()); };
  auto g = [](const Vec2& p) {
    return Vec2(kPi * std::cos(kPi * p.x()) * std::sin(kPi * p.y()),
                kPi * std::sin(kPi * p.x()) * std::cos(kPi * p.y()));
  };
  double prev = 0.0;
  for (int n : {4, 8, 16, 32}) {
    const P1Space space = unit_space(n);
    const double e = error_norms(space, interpolate_nodal(space, f), f, g).l2;
    if (prev > 0.0) EXPECT_NEAR(std::log2(prev / e), 2.0, 0.15);
    prev = e;
  }
}

TEST(Fem, L2ProjectionReproducesLinears) {
  const P1Space space = unit_space(5);
  const Eigen::VectorXd c = l2_projection(space, [](const Vec2&) { return 2.5; });
  EXPECT_LT((c.array() - 2.5).abs().maxCoeff(), 1e-10);
  auto lin = [](const Vec2& p) { return 1.0 + 2.0 * p.x() - 3.0 * p.y(); };
  const Eigen::VectorXd cl = l2_projection(space, lin, {1e-13, 10000});
  EXPECT_LT((cl - interpolate_nodal(space, lin)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fem, L2ProjectionIsMassOrthogonal) {
  const P1Space space = unit_space(6);
  auto f = [](const Vec2& p) { return std::exp(p.x()) * std::cos(2.0 * p.y()); };
  const Eigen::VectorXd c = l2_projection(space, f, {1e-13, 10000});
  // (f - Pi f, chi) with both sides from a degree-6 rule.
  const Eigen::VectorXd residual = load_vector(space, f, 6) - assemble_mass(space).matrix * c;
  EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fem, RieszReproducesLinears) {
  auto f = [](const Vec2& p) { return 0.5 - p.x() + 4.0 * p.y(); };
  auto g = [](const Vec2&) { return Vec2(-1.0, 4.0); };
  const P1Space macro = unit_space(4);
  const P1Space micro = micro_space(4);
  const CgOptions tight{1e-13, 10000};
  EXPECT_LT((h1_riesz_projection(macro, f, g, RieszVariant::DirichletZero, tight) -
             interpolate_nodal(macro, f)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((h1_riesz_projection(micro, f, g, RieszVariant::FullH1, tight) -
             interpolate_nodal(micro, f)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(h1_riesz_projection(micro, f, g, RieszVariant::DirichletZero), PreconditionError);
}

TEST(Fem, RieszGalerkinOrthogonality) {
  const P1Space space = unit_space(8);
  auto f = [](const Vec2& p) { return std::sin(kPi * p.x()) * std::sin(kPi * p.y()); };
  auto g = [](const Vec2& p) {
    return Vec2(kPi * std::cos(kPi * p.x()) * std::sin(kPi * p.y()),
                kPi * std::sin(kPi * p.x()) * std::cos(kPi * p.y()));
  };
  const Eigen::VectorXd c = h1_riesz_projection(space, f, g, RieszVariant::DirichletZero, {1e-13, 10000});
  const Eigen::VectorXd r = assemble_stiffness(space).matrix * c - gradient_load_vector(space, g, 4);
  std::mt19937 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd chi(space.n_dof());
    for (int i = 0; i < chi.size(); ++i) chi[i] = space.dirichlet_mask()[i] ? 0.0 : normal(rng);
    EXPECT_LT(std::abs(chi.dot(r)), 1e-10 * chi.norm());
  }
}

TEST(Fem, RieszIsIdempotent) {
  const P1Space space = micro_space(5);
  const Eigen::VectorXd c0 = Eigen::VectorXd::Random(space.n_dof());
  // Evaluate the discrete function and its gradient via point location on the grid.
  const Mesh2D& mesh = space.mesh();
  auto locate = [&](const Vec2& p) {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const auto& v = mesh.vertices();
      const Eigen::Matrix2d jac = (Eigen::Matrix2d() << v[tri[1]] - v[tri[0]], v[tri[2]] - v[tri[0]]).finished();
      const Vec2 s = jac.inverse() * (p - v[tri[0]]);
      if (s.minCoeff() >= -1e-12 && s.sum() <= 1.0 + 1e-12) {
        return std::pair{t, std::array<double, 3>{1.0 - s.sum(), s.x(), s.y()}};
      }
    }
    return std::pair{-1, std::array<double, 3>{}};
  };
  auto f = [&](const Vec2& p) { const auto [t, b] = locate(p); return space.value(c0, t, b); };
  auto g = [&](const Vec2& p) { return space.gradient(c0, locate(p).first); };
  const Eigen::VectorXd c = h1_riesz_projection(space, f, g, RieszVariant::FullH1, {1e-13, 10000});
  EXPECT_LT((c - c0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fem, CgIdentity) {
  SparseOperator id;
  id.matrix.resize(5, 5);
  id.matrix.setIdentity();
  id.symmetric = true;
  const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(5, -1.0, 3.0);
  EXPECT_EQ(cg_solve(id, rhs), rhs);
}

TEST(Fem, CgRecoversConstructedSolution) {
  const P1Space space = unit_space(10);
  SparseOperator op;
  op.matrix = assemble_mass(space).matrix + 0.01 * assemble_stiffness(space).matrix;
  op.symmetric = true;
  const Eigen::VectorXd y = Eigen::VectorXd::Random(space.n_dof());
  const Eigen::VectorXd rhs = op.matrix * y;
  const double tol = 1e-12;
  const Eigen::VectorXd x = cg_solve(op, rhs, {tol, 10000});
  EXPECT_LE((op.matrix * x - rhs).norm(), tol * rhs.norm());
  EXPECT_LT((x - y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fem, CgColumnsMatchSingleSolves) {
  const P1Space space = unit_space(6);
  SparseOperator op;
  op.matrix = assemble_mass(space).matrix + 0.1 * assemble_stiffness(space).matrix;
  op.symmetric = true;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Random(space.n_dof(), 4);
  rhs.col(2).setZero();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(space.n_dof(), 4);
  cg_solve_columns(op, rhs, x, {1e-12, 1000});
  for (int j = 0; j < 4; ++j) {
    EXPECT_LE((op.matrix * x.col(j) - rhs.col(j)).norm(), 1e-12 * rhs.col(j).norm() + 1e-300);
  }
  EXPECT_TRUE(x.col(2).isZero());
}

TEST(Fem, CgRejectsUnsymmetricAndReportsFailure) {
  const P1Space space = unit_space(4);
  SparseOperator op = assemble_stiffness(space);
  op.symmetric = false;
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(space.n_dof());
  EXPECT_THROW(cg_solve(op, rhs), PreconditionError);

  op = assemble_mass(space);
  try {
    cg_solve(op, Eigen::VectorXd::Random(space.n_dof()), {1e-14, 2});
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.iterations(), 2u);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Fem, DirichletEliminationKeepsSymmetry) {
  const P1Space space = unit_space(4);
  const ConstrainedOperator c(assemble_stiffness(space), space.dirichlet_mask());
  EXPECT_EQ(max_abs(c.op().matrix - SparseMatrix(c.op().matrix.transpose())), 0.0);
  // Harmonic linear data is reproduced exactly.
  auto lin = [](const Vec2& p) { return 3.0 * p.x() + p.y(); };
  const Eigen::VectorXd g = interpolate_nodal(space, lin);
  const Eigen::VectorXd u = c.solve(Eigen::VectorXd::Zero(space.n_dof()), g, {1e-13, 1000});
  EXPECT_LT((u - g).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Fem, Norms) {
  const P1Space space = unit_space(4);
  const Norms zero = norms(space, Eigen::VectorXd::Zero(space.n_dof()));
  EXPECT_EQ(zero.l2, 0.0);
  EXPECT_EQ(zero.h1_semi, 0.0);
  const Norms constant = norms(space, Eigen::VectorXd::Constant(space.n_dof(), -3.0));
  EXPECT_NEAR(constant.l2, 3.0, 1e-12);
  EXPECT_NEAR(constant.h1_semi, 0.0, 1e-6);
  const Norms x = norms(space, interpolate_nodal(space, [](const Vec2& p) { return p.x(); }));
  EXPECT_NEAR(x.h1_semi, 1.0, 1e-12);
}

TEST(Fem, BoundaryLoadOfConstantIsLumpedEdgeLength) {
  const P1Space space = micro_space(4);
  const Eigen::VectorXd load = boundary_load_vector(
      space, BoundaryTag::GammaR, [](const Vec2&, const Vec2& n) { return n.y(); });
  EXPECT_NEAR(load.sum(), 1.0, 1e-14);  // outward normal on the top edge is +y
  EXPECT_NEAR(load[space.n_dof() - 1], 0.125, 1e-15);
}
