#include "twoscale/twoscale.hpp"

#include "twoscale/quadrature.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace twoscale {

namespace {

struct QuadData {
  std::vector<Vec2> points;
  std::vector<double> weights;       // area-scaled
  std::vector<int> triangle;
  std::vector<std::array<double, 3>> bary;
};

QuadData quadrature_points(const Mesh2D& mesh, int degree) {
  QuadData q;
  const auto rule = triangle_rule(degree);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& v = mesh.vertices();
    const double area = mesh.triangle_area(t);
    for (const auto& qp : rule) {
      q.points.push_back(qp.bary[0] * v[tri[0]] + qp.bary[1] * v[tri[1]] + qp.bary[2] * v[tri[2]]);
      q.weights.push_back(qp.weight * area);
      q.triangle.push_back(t);
      q.bary.push_back(qp.bary);
    }
  }
  return q;
}

}  // namespace

TwoScaleField interpolate_two_scale(std::shared_ptr<const P1Space> macro,
                                    std::shared_ptr<const P1Space> micro,
                                    const std::function<double(const Vec2&, const Vec2&)>& w) {
  TwoScaleField out(macro, micro);
  const auto& xs = macro->mesh().vertices();
  const auto& ys = micro->mesh().vertices();
  for (std::size_t j = 0; j < xs.size(); ++j) {
    for (std::size_t k = 0; k < ys.size(); ++k) out.coeffs()(j, k) = w(xs[j], ys[k]);
  }
  return out;
}

TwoScaleCoeffs<double> solve_kronecker(const SparseOperator& kx, const SparseOperator& ky,
                                       const TwoScaleCoeffs<double>& load,
                                       const CgOptions& options) {
  if (load.rows() != kx.rows() || load.cols() != ky.rows()) {
    throw DimensionMismatch("Kronecker load does not match operators");
  }
  // Kx Z = load, column by column (one system per micro index).
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(load.rows(), load.cols());
  cg_solve_columns(kx, Eigen::MatrixXd(load), z, options);
  // beta Ky = Z, i.e. Ky beta' = Z'.
  Eigen::MatrixXd beta_t = Eigen::MatrixXd::Zero(load.cols(), load.rows());
  cg_solve_columns(ky, z.transpose(), beta_t, options);
  return beta_t.transpose();
}

TwoScaleField micro_macro_riesz(const TwoScaleFunction& w, const TwoScaleGradY& grad_y_w,
                                std::shared_ptr<const P1Space> macro,
                                std::shared_ptr<const P1Space> micro, const CgOptions& options) {
  const QuadData qx = quadrature_points(macro->mesh(), 4);
  const QuadData qy = quadrature_points(micro->mesh(), 4);
  const Mesh2D& my = micro->mesh();
  TwoScaleCoeffs<double> load = TwoScaleCoeffs<double>::Zero(macro->n_dof(), micro->n_dof());
  for (std::size_t a = 0; a < qx.points.size(); ++a) {
    const auto& tri_x = macro->mesh().triangles()[qx.triangle[a]];
    // Micro load of y -> w(x_a, y) against eta_k in the H1 inner product.
    Eigen::VectorXd micro_load = Eigen::VectorXd::Zero(micro->n_dof());
    for (std::size_t b = 0; b < qy.points.size(); ++b) {
      const auto& tri_y = my.triangles()[qy.triangle[b]];
      const auto& v = my.vertices();
      const auto grads = hat_gradients(v[tri_y[0]], v[tri_y[1]], v[tri_y[2]]);
      const double value = w(qx.points[a], qy.points[b]);
      const Vec2 grad = grad_y_w(qx.points[a], qy.points[b]);
      for (int i = 0; i < 3; ++i) {
        micro_load[tri_y[i]] += qy.weights[b] * (value * qy.bary[b][i] + grad.dot(grads[i]));
      }
    }
    for (int i = 0; i < 3; ++i) {
      load.row(tri_x[i]) += (qx.weights[a] * qx.bary[a][i]) * micro_load.transpose();
    }
  }
  SparseOperator h1;
  h1.matrix = assemble_stiffness(*micro).matrix + assemble_mass(*micro).matrix;
  h1.symmetric = true;
  return TwoScaleField(macro, micro, solve_kronecker(assemble_mass(*macro), h1, load, options));
}

TwoScaleField micro_macro_riesz(const SeparableField& w, double t,
                                std::shared_ptr<const P1Space> macro,
                                std::shared_ptr<const P1Space> micro, const CgOptions& options) {
  const Eigen::VectorXd tau = w.time_factors(t);
  TwoScaleCoeffs<double> load = TwoScaleCoeffs<double>::Zero(macro->n_dof(), micro->n_dof());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Eigen::VectorXd lx = load_vector(*macro, [&](const Vec2& x) { return w.macro_factor(i, x); }, 4);
    const Eigen::VectorXd ly =
        load_vector(*micro, [&](const Vec2& y) { return w.micro_factor(i, y); }, 4) +
        gradient_load_vector(*micro, [&](const Vec2& y) { return w.micro_gradient(i, y); }, 4);
    load.noalias() += tau[i] * lx * ly.transpose();
  }
  SparseOperator h1;
  h1.matrix = assemble_stiffness(*micro).matrix + assemble_mass(*micro).matrix;
  h1.symmetric = true;
  return TwoScaleField(macro, micro, solve_kronecker(assemble_mass(*macro), h1, load, options));
}

Eigen::VectorXd trace_values_on_gamma_r(const TwoScaleField& w, int macro_node) {
  if (macro_node < 0 || macro_node >= w.n_macro()) {
    throw PreconditionError("macro node " + std::to_string(macro_node) + " out of range");
  }
  const auto ids = w.micro_space().mesh().tagged_vertices(BoundaryTag::GammaR);
  Eigen::VectorXd out(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = w.coeffs()(macro_node, ids[i]);
  return out;
}

void write_field_csv(std::ostream& out, const TwoScaleField& w) {
  const auto precision = out.precision(17);
  out << "macro_node,micro_node,value\n";
  for (Eigen::Index j = 0; j < w.n_macro(); ++j) {
    for (Eigen::Index k = 0; k < w.n_micro(); ++k) {
      out << j << ',' << k << ',' << w.coeffs()(j, k) << '\n';
    }
  }
  out.precision(precision);
}

}  // namespace twoscale
