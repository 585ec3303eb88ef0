#pragma once

#include "twoscale/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace twoscale {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Assembled operator plus the symmetry flag the CG solver checks.
struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

/// Continuous piecewise-linear nodal space on a mesh. One dof per vertex.
class P1Space {
 public:
  explicit P1Space(std::shared_ptr<const Mesh2D> mesh);

  const Mesh2D& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh2D> mesh_ptr() const { return mesh_; }
  int n_dof() const { return mesh_->n_vertices(); }
  /// True on vertices of MacroDirichlet edges; all false on micro meshes.
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_mask_; }
  int n_dirichlet() const;

  /// Value and gradient of the discrete function at a point of triangle t.
  double value(const Eigen::VectorXd& coeffs, int t, const std::array<double, 3>& bary) const;
  Vec2 gradient(const Eigen::VectorXd& coeffs, int t) const;

 private:
  std::shared_ptr<const Mesh2D> mesh_;
  std::vector<bool> dirichlet_mask_;
};

/// Gradients of the three barycentric hat functions on a triangle.
std::array<Vec2, 3> hat_gradients(const Vec2& a, const Vec2& b, const Vec2& c);
Eigen::Matrix3d element_mass(const Vec2& a, const Vec2& b, const Vec2& c);
Eigen::Matrix3d element_stiffness(const Vec2& a, const Vec2& b, const Vec2& c);
Eigen::Matrix2d edge_mass(double length);

/// Consistent P1 mass matrix. `triangle_order`, when given, is the element
/// visiting order (used to check order independence).
SparseOperator assemble_mass(const P1Space& space, const std::vector<int>* triangle_order = nullptr);
/// Unit-coefficient P1 stiffness matrix.
SparseOperator assemble_stiffness(const P1Space& space,
                                  const std::vector<int>* triangle_order = nullptr);
/// Edge mass on the boundary edges carrying `tag`. Throws InvalidTag if none do.
SparseOperator assemble_boundary_mass(const P1Space& space, BoundaryTag tag);
/// Row sums of the consistent mass matrix.
Eigen::VectorXd lumped_mass(const SparseOperator& mass);

Eigen::VectorXd interpolate_nodal(const P1Space& space, const ScalarField& f);

/// \f$ \int f \xi_j \f$ with a triangle rule of the given degree.
Eigen::VectorXd load_vector(const P1Space& space, const ScalarField& f, int degree = 4);
/// \f$ \int g \cdot \nabla \xi_j \f$.
Eigen::VectorXd gradient_load_vector(const P1Space& space, const VectorField& g, int degree = 4);
/// \f$ \int_{\Gamma_{tag}} g(y, n) \xi_j \f$ with an n-point Gauss rule per edge.
Eigen::VectorXd boundary_load_vector(const P1Space& space, BoundaryTag tag,
                                     const std::function<double(const Vec2&, const Vec2&)>& g,
                                     int points = 3);

struct CgOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

/// Jacobi-preconditioned conjugate gradients. Throws PreconditionError for an
/// operator not flagged symmetric and SolverError when max_iter is reached.
Eigen::VectorXd cg_solve(const SparseOperator& op, const Eigen::VectorXd& rhs,
                         const CgOptions& options = {});
Eigen::VectorXd cg_solve(const SparseOperator& op, const Eigen::VectorXd& rhs,
                         const Eigen::VectorXd& guess, const CgOptions& options);

/// Solves op * X = rhs for every column at once, starting from X. Each column
/// converges independently to the relative tolerance. Returns the largest
/// iteration count over the columns.
int cg_solve_columns(const SparseOperator& op, const Eigen::Ref<const Eigen::MatrixXd>& rhs,
                     Eigen::Ref<Eigen::MatrixXd> x, const CgOptions& options = {});

/// Symmetric elimination of constrained dofs: constrained rows and columns
/// become identity rows, their values move to the right-hand side.
class ConstrainedOperator {
 public:
  ConstrainedOperator(const SparseOperator& op, std::vector<bool> mask);

  const SparseOperator& op() const { return reduced_; }
  const std::vector<bool>& mask() const { return mask_; }
  /// rhs - K[:, D] g on free rows, g on constrained rows.
  Eigen::VectorXd lift_rhs(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values,
                        const CgOptions& options = {}) const;

 private:
  SparseOperator reduced_;
  SparseMatrix coupling_;
  std::vector<bool> mask_;
};

/// Solves M c = load(f) with a degree-4 load.
Eigen::VectorXd l2_projection(const P1Space& space, const ScalarField& f,
                              const CgOptions& options = {});

enum class RieszVariant { DirichletZero, FullH1 };

/// Elliptic projection. DirichletZero solves A c = (grad f, grad xi) with
/// constrained rows pinned to the nodal values of f; FullH1 solves
/// (A + M) c = (grad f, grad xi) + (f, xi).
Eigen::VectorXd h1_riesz_projection(const P1Space& space, const ScalarField& f,
                                    const VectorField& grad_f, RieszVariant variant,
                                    const CgOptions& options = {});

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

/// (sqrt(c'Mc), sqrt(c'Ac)).
Norms norms(const SparseOperator& mass, const SparseOperator& stiffness,
            const Eigen::VectorXd& coeffs);
Norms norms(const P1Space& space, const Eigen::VectorXd& coeffs);

/// Norms of (discrete - exact) by quadrature of the given degree.
Norms error_norms(const P1Space& space, const Eigen::VectorXd& coeffs, const ScalarField& f,
                  const VectorField& grad_f, int degree = 6);

/// "i j value" triples, one per stored entry.
void write_coordinate(std::ostream& out, const SparseMatrix& matrix);

}  // namespace twoscale
