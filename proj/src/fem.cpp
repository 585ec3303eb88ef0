#include "twoscale/fem.hpp"

#include "twoscale/errors.hpp"
#include "twoscale/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace twoscale {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

Vec2 point_at(const Mesh2D& mesh, int t, const std::array<double, 3>& bary) {
  const auto& tri = mesh.triangles()[t];
  const auto& v = mesh.vertices();
  return bary[0] * v[tri[0]] + bary[1] * v[tri[1]] + bary[2] * v[tri[2]];
}

std::vector<int> identity_order(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

template <typename ElementFn>
SparseOperator assemble_elementwise(const P1Space& space, const std::vector<int>* order,
                                    ElementFn element) {
  const Mesh2D& mesh = space.mesh();
  const auto default_order = order ? std::vector<int>{} : identity_order(mesh.n_triangles());
  const auto& visit = order ? *order : default_order;
  Triplets triplets;
  triplets.reserve(9 * visit.size());
  for (int t : visit) {
    const auto& tri = mesh.triangles()[t];
    const auto& v = mesh.vertices();
    const Eigen::Matrix3d local = element(v[tri[0]], v[tri[1]], v[tri[2]]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(tri[i], tri[j], local(i, j));
    }
  }
  SparseOperator op;
  op.matrix.resize(space.n_dof(), space.n_dof());
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.symmetric = true;
  return op;
}

}  // namespace

P1Space::P1Space(std::shared_ptr<const Mesh2D> mesh)
    : mesh_(std::move(mesh)), dirichlet_mask_(mesh_->n_vertices(), false) {
  for (const auto& e : mesh_->boundary_edges()) {
    if (e.tag == BoundaryTag::MacroDirichlet) {
      dirichlet_mask_[e.vertices[0]] = true;
      dirichlet_mask_[e.vertices[1]] = true;
    }
  }
}

int P1Space::n_dirichlet() const {
  return static_cast<int>(std::count(dirichlet_mask_.begin(), dirichlet_mask_.end(), true));
}

double P1Space::value(const Eigen::VectorXd& coeffs, int t,
                      const std::array<double, 3>& bary) const {
  const auto& tri = mesh_->triangles()[t];
  return bary[0] * coeffs[tri[0]] + bary[1] * coeffs[tri[1]] + bary[2] * coeffs[tri[2]];
}

Vec2 P1Space::gradient(const Eigen::VectorXd& coeffs, int t) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& v = mesh_->vertices();
  const auto grads = hat_gradients(v[tri[0]], v[tri[1]], v[tri[2]]);
  return coeffs[tri[0]] * grads[0] + coeffs[tri[1]] * grads[1] + coeffs[tri[2]] * grads[2];
}

std::array<Vec2, 3> hat_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double twice_area = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  const std::array<const Vec2*, 3> p{&a, &b, &c};
  std::array<Vec2, 3> grads;
  for (int i = 0; i < 3; ++i) {
    const Vec2& q = *p[(i + 1) % 3];
    const Vec2& r = *p[(i + 2) % 3];
    grads[i] = Vec2(q.y() - r.y(), r.x() - q.x()) / twice_area;
  }
  return grads;
}

Eigen::Matrix3d element_mass(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  Eigen::Matrix3d m = Eigen::Matrix3d::Constant(1.0);
  m.diagonal().setConstant(2.0);
  return area / 12.0 * m;
}

Eigen::Matrix3d element_stiffness(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  const auto g = hat_gradients(a, b, c);
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k(i, j) = area * g[i].dot(g[j]);
  }
  return k;
}

Eigen::Matrix2d edge_mass(double length) {
  Eigen::Matrix2d m;
  m << 2.0, 1.0, 1.0, 2.0;
  return length / 6.0 * m;
}

SparseOperator assemble_mass(const P1Space& space, const std::vector<int>* triangle_order) {
  return assemble_elementwise(space, triangle_order, element_mass);
}

SparseOperator assemble_stiffness(const P1Space& space, const std::vector<int>* triangle_order) {
  return assemble_elementwise(space, triangle_order, element_stiffness);
}

SparseOperator assemble_boundary_mass(const P1Space& space, BoundaryTag tag) {
  const Mesh2D& mesh = space.mesh();
  if (!mesh.has_tag(tag)) throw InvalidTag("mesh has no boundary edge tagged " + to_string(tag));
  Triplets triplets;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != tag) continue;
    const auto [p, q] = e.vertices;
    const Eigen::Matrix2d local = edge_mass((mesh.vertices()[q] - mesh.vertices()[p]).norm());
    const std::array<int, 2> ids{p, q};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) triplets.emplace_back(ids[i], ids[j], local(i, j));
    }
  }
  SparseOperator op;
  op.matrix.resize(space.n_dof(), space.n_dof());
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.symmetric = true;
  return op;
}

Eigen::VectorXd lumped_mass(const SparseOperator& mass) {
  return mass.matrix * Eigen::VectorXd::Ones(mass.cols());
}

Eigen::VectorXd interpolate_nodal(const P1Space& space, const ScalarField& f) {
  Eigen::VectorXd c(space.n_dof());
  for (int i = 0; i < space.n_dof(); ++i) c[i] = f(space.mesh().vertices()[i]);
  return c;
}

Eigen::VectorXd load_vector(const P1Space& space, const ScalarField& f, int degree) {
  const Mesh2D& mesh = space.mesh();
  const auto rule = triangle_rule(degree);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_dof());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.triangle_area(t);
    for (const auto& qp : rule) {
      const double fw = f(point_at(mesh, t, qp.bary)) * qp.weight * area;
      for (int i = 0; i < 3; ++i) load[tri[i]] += fw * qp.bary[i];
    }
  }
  return load;
}

Eigen::VectorXd gradient_load_vector(const P1Space& space, const VectorField& g, int degree) {
  const Mesh2D& mesh = space.mesh();
  const auto rule = triangle_rule(degree);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_dof());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& v = mesh.vertices();
    const double area = mesh.triangle_area(t);
    Vec2 mean = Vec2::Zero();
    for (const auto& qp : rule) mean += qp.weight * g(point_at(mesh, t, qp.bary));
    const auto grads = hat_gradients(v[tri[0]], v[tri[1]], v[tri[2]]);
    for (int i = 0; i < 3; ++i) load[tri[i]] += area * mean.dot(grads[i]);
  }
  return load;
}

Eigen::VectorXd boundary_load_vector(const P1Space& space, BoundaryTag tag,
                                     const std::function<double(const Vec2&, const Vec2&)>& g,
                                     int points) {
  const Mesh2D& mesh = space.mesh();
  const auto rule = line_rule(points);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_dof());
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != tag) continue;
    const Vec2& p = mesh.vertices()[e.vertices[0]];
    const Vec2& q = mesh.vertices()[e.vertices[1]];
    const Vec2 d = q - p;
    const double length = d.norm();
    const Vec2 normal(d.y() / length, -d.x() / length);
    for (const auto& qp : rule) {
      const double gw = g(p + qp.s * d, normal) * qp.weight * length;
      load[e.vertices[0]] += gw * (1.0 - qp.s);
      load[e.vertices[1]] += gw * qp.s;
    }
  }
  return load;
}

Eigen::VectorXd cg_solve(const SparseOperator& op, const Eigen::VectorXd& rhs,
                         const CgOptions& options) {
  return cg_solve(op, rhs, Eigen::VectorXd::Zero(rhs.size()), options);
}

Eigen::VectorXd cg_solve(const SparseOperator& op, const Eigen::VectorXd& rhs,
                         const Eigen::VectorXd& guess, const CgOptions& options) {
  Eigen::MatrixXd x = guess;
  cg_solve_columns(op, rhs, x, options);
  return x.col(0);
}

int cg_solve_columns(const SparseOperator& op, const Eigen::Ref<const Eigen::MatrixXd>& rhs,
                     Eigen::Ref<Eigen::MatrixXd> x, const CgOptions& options) {
  if (!op.symmetric) throw PreconditionError("cg_solve requires a symmetric operator");
  if (!(options.tol > 0.0)) throw PreconditionError("cg tolerance must be positive");
  const Eigen::Index n = op.rows();
  if (op.cols() != n || rhs.rows() != n || x.rows() != n || x.cols() != rhs.cols()) {
    throw DimensionMismatch("cg_solve dimensions do not match");
  }
  const Eigen::Index m = rhs.cols();
  if (m == 0) return 0;

  const Eigen::VectorXd diag = op.matrix.diagonal();
  if ((diag.array() <= 0.0).any()) {
    throw PreconditionError("cg_solve requires a positive diagonal");
  }
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();

  const Eigen::ArrayXd target = options.tol * rhs.colwise().norm().transpose().array();
  Eigen::MatrixXd r = rhs - op.matrix * x;
  Eigen::ArrayXd res = r.colwise().norm().transpose().array();
  // Columns with a zero right-hand side are solved by zero.
  for (Eigen::Index j = 0; j < m; ++j) {
    if (target[j] == 0.0) {
      x.col(j).setZero();
      r.col(j).setZero();
      res[j] = 0.0;
    }
  }
  auto active = (res > target).cast<double>().eval();
  if ((active == 0.0).all()) return 0;

  Eigen::MatrixXd z = inv_diag.asDiagonal() * r;
  Eigen::MatrixXd p = z;
  Eigen::ArrayXd rz = r.cwiseProduct(z).colwise().sum().transpose().array();
  Eigen::MatrixXd q(n, m);

  int iter = 0;
  while ((active != 0.0).any()) {
    if (iter >= options.max_iter) {
      Eigen::Index worst;
      (res / target.max(1e-300)).maxCoeff(&worst);
      throw SolverError("conjugate gradients did not converge", iter,
                        res[worst] / std::max(target[worst] / options.tol, 1e-300));
    }
    ++iter;
    q.noalias() = op.matrix * p;
    const Eigen::ArrayXd pq = p.cwiseProduct(q).colwise().sum().transpose().array();
    const Eigen::ArrayXd alpha = (active != 0.0).select(rz / pq, 0.0);
    x.noalias() += p * alpha.matrix().asDiagonal();
    r.noalias() -= q * alpha.matrix().asDiagonal();
    res = r.colwise().norm().transpose().array();

    const Eigen::ArrayXd newly_done = ((active != 0.0) && (res <= target)).cast<double>();
    if ((newly_done != 0.0).any()) {
      // Confirm against the true residual before retiring a column.
      for (Eigen::Index j = 0; j < m; ++j) {
        if (newly_done[j] == 0.0) continue;
        const Eigen::VectorXd true_r = rhs.col(j) - op.matrix * x.col(j);
        if (true_r.norm() <= target[j]) {
          active[j] = 0.0;
        } else {
          r.col(j) = true_r;
          res[j] = true_r.norm();
        }
      }
    }

    z.noalias() = inv_diag.asDiagonal() * r;
    const Eigen::ArrayXd rz_new = r.cwiseProduct(z).colwise().sum().transpose().array();
    const Eigen::ArrayXd beta = (active != 0.0).select(rz_new / rz, 0.0);
    p = z + p * beta.matrix().asDiagonal();
    rz = rz_new;
  }
  return iter;
}

ConstrainedOperator::ConstrainedOperator(const SparseOperator& op, std::vector<bool> mask)
    : mask_(std::move(mask)) {
  if (static_cast<Eigen::Index>(mask_.size()) != op.rows()) {
    throw DimensionMismatch("constraint mask size differs from operator size");
  }
  Triplets kept, coupled;
  for (int col = 0; col < op.matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(op.matrix, col); it; ++it) {
      const auto row = static_cast<int>(it.row());
      if (mask_[row]) continue;
      if (mask_[col]) {
        coupled.emplace_back(row, col, it.value());
      } else {
        kept.emplace_back(row, col, it.value());
      }
    }
  }
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) kept.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  }
  reduced_.matrix.resize(op.rows(), op.cols());
  reduced_.matrix.setFromTriplets(kept.begin(), kept.end());
  reduced_.symmetric = op.symmetric;
  coupling_.resize(op.rows(), op.cols());
  coupling_.setFromTriplets(coupled.begin(), coupled.end());
}

Eigen::VectorXd ConstrainedOperator::lift_rhs(const Eigen::VectorXd& rhs,
                                              const Eigen::VectorXd& values) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(values.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) g[i] = values[i];
  }
  Eigen::VectorXd out = rhs - coupling_ * g;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out[i] = values[i];
  }
  return out;
}

Eigen::VectorXd ConstrainedOperator::solve(const Eigen::VectorXd& rhs,
                                           const Eigen::VectorXd& values,
                                           const CgOptions& options) const {
  return cg_solve(reduced_, lift_rhs(rhs, values), options);
}

Eigen::VectorXd l2_projection(const P1Space& space, const ScalarField& f,
                              const CgOptions& options) {
  return cg_solve(assemble_mass(space), load_vector(space, f, 4), options);
}

Eigen::VectorXd h1_riesz_projection(const P1Space& space, const ScalarField& f,
                                    const VectorField& grad_f, RieszVariant variant,
                                    const CgOptions& options) {
  const SparseOperator stiffness = assemble_stiffness(space);
  const Eigen::VectorXd grad_load = gradient_load_vector(space, grad_f, 4);
  if (variant == RieszVariant::FullH1) {
    SparseOperator op;
    op.matrix = stiffness.matrix + assemble_mass(space).matrix;
    op.symmetric = true;
    return cg_solve(op, grad_load + load_vector(space, f, 4), options);
  }
  if (space.n_dirichlet() == 0) {
    throw PreconditionError("dirichlet_zero Riesz projection needs constrained boundary dofs");
  }
  const ConstrainedOperator constrained(stiffness, space.dirichlet_mask());
  return constrained.solve(grad_load, interpolate_nodal(space, f), options);
}

Norms norms(const SparseOperator& mass, const SparseOperator& stiffness,
            const Eigen::VectorXd& coeffs) {
  const double m = coeffs.dot(mass.matrix * coeffs);
  const double a = coeffs.dot(stiffness.matrix * coeffs);
  return {std::sqrt(std::max(m, 0.0)), std::sqrt(std::max(a, 0.0))};
}

Norms norms(const P1Space& space, const Eigen::VectorXd& coeffs) {
  return norms(assemble_mass(space), assemble_stiffness(space), coeffs);
}

Norms error_norms(const P1Space& space, const Eigen::VectorXd& coeffs, const ScalarField& f,
                  const VectorField& grad_f, int degree) {
  const Mesh2D& mesh = space.mesh();
  const auto rule = triangle_rule(degree);
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double area = mesh.triangle_area(t);
    const Vec2 gh = space.gradient(coeffs, t);
    double l2_t = 0.0, h1_t = 0.0;
    for (const auto& qp : rule) {
      const Vec2 x = point_at(mesh, t, qp.bary);
      const double e = space.value(coeffs, t, qp.bary) - f(x);
      l2_t += qp.weight * e * e;
      h1_t += qp.weight * (gh - grad_f(x)).squaredNorm();
    }
    l2 += area * l2_t;
    h1 += area * h1_t;
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

void write_coordinate(std::ostream& out, const SparseMatrix& matrix) {
  const auto precision = out.precision(17);
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  out.precision(precision);
}

}  // namespace twoscale
