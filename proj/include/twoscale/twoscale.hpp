#pragma once

#include "twoscale/errors.hpp"
#include "twoscale/fem.hpp"
#include "twoscale/separable.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <iosfwd>
#include <memory>

namespace twoscale {

/// Dense coefficient matrix of a function in V_h (x) B_h: entry (j, k)
/// multiplies xi_j(x) eta_k(y). Row j is the micro function attached to
/// macro node j.
template <typename Scalar>
using TwoScaleCoeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
class BasicTwoScaleField {
 public:
  using Coeffs = TwoScaleCoeffs<Scalar>;

  BasicTwoScaleField() = default;
  BasicTwoScaleField(std::shared_ptr<const P1Space> macro, std::shared_ptr<const P1Space> micro)
      : coeffs_(Coeffs::Zero(macro->n_dof(), micro->n_dof())),
        macro_(std::move(macro)),
        micro_(std::move(micro)) {}
  BasicTwoScaleField(std::shared_ptr<const P1Space> macro, std::shared_ptr<const P1Space> micro,
                     Coeffs coeffs)
      : coeffs_(std::move(coeffs)), macro_(std::move(macro)), micro_(std::move(micro)) {
    if (coeffs_.rows() != macro_->n_dof() || coeffs_.cols() != micro_->n_dof()) {
      throw DimensionMismatch("two-scale coefficients do not match the spaces");
    }
  }

  Coeffs& coeffs() { return coeffs_; }
  const Coeffs& coeffs() const { return coeffs_; }
  const P1Space& macro_space() const { return *macro_; }
  const P1Space& micro_space() const { return *micro_; }
  std::shared_ptr<const P1Space> macro_ptr() const { return macro_; }
  std::shared_ptr<const P1Space> micro_ptr() const { return micro_; }

  Eigen::Index n_macro() const { return coeffs_.rows(); }
  Eigen::Index n_micro() const { return coeffs_.cols(); }

  /// Pointwise value sum_jk beta_jk xi_j(x) eta_k(y) given barycentric
  /// coordinates in macro triangle tx and micro triangle ty.
  Scalar value(int tx, const std::array<double, 3>& bx, int ty,
               const std::array<double, 3>& by) const {
    const auto& tri_x = macro_->mesh().triangles()[tx];
    const auto& tri_y = micro_->mesh().triangles()[ty];
    Scalar sum = 0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) sum += bx[a] * by[b] * coeffs_(tri_x[a], tri_y[b]);
    }
    return sum;
  }

 private:
  Coeffs coeffs_;
  std::shared_ptr<const P1Space> macro_;
  std::shared_ptr<const P1Space> micro_;
};

using TwoScaleField = BasicTwoScaleField<double>;

/// <a, b> in the Kronecker metric Kx (x) Ky, evaluated as
/// sum((Kx a) .* (b Ky)) without forming the Kronecker product. Ky must be
/// symmetric.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar ts_inner(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b, const SparseMatrix& kx,
                                   const SparseMatrix& ky) {
  if (a.rows() != kx.rows() || b.rows() != kx.rows() || a.cols() != ky.rows() ||
      b.cols() != ky.rows() || kx.rows() != kx.cols() || ky.rows() != ky.cols()) {
    throw DimensionMismatch("two-scale contraction dimensions do not match");
  }
  using Scalar = typename DerivedA::Scalar;
  const TwoScaleCoeffs<Scalar> left = kx * a.derived();
  const TwoScaleCoeffs<Scalar> right = b.derived() * ky;
  return left.cwiseProduct(right).sum();
}

/// L2(Omega x Y) norm sqrt(vec(beta)' (Mx (x) My) vec(beta)).
template <typename Derived>
typename Derived::Scalar ts_l2_norm(const Eigen::MatrixBase<Derived>& beta,
                                    const SparseOperator& mx, const SparseOperator& my) {
  using std::sqrt;
  const auto sq = ts_inner(beta, beta, mx.matrix, my.matrix);
  return sqrt(sq > 0 ? sq : 0);
}

/// L2(Omega; H1(Y)) seminorm sqrt(vec(beta)' (Mx (x) Ay) vec(beta)).
template <typename Derived>
typename Derived::Scalar ts_h1y_seminorm(const Eigen::MatrixBase<Derived>& beta,
                                         const SparseOperator& mx, const SparseOperator& ay) {
  using std::sqrt;
  const auto sq = ts_inner(beta, beta, mx.matrix, ay.matrix);
  return sqrt(sq > 0 ? sq : 0);
}

inline double ts_l2_norm(const TwoScaleField& w, const SparseOperator& mx, const SparseOperator& my) {
  return ts_l2_norm(w.coeffs(), mx, my);
}

inline double ts_h1y_seminorm(const TwoScaleField& w, const SparseOperator& mx,
                              const SparseOperator& ay) {
  return ts_h1y_seminorm(w.coeffs(), mx, ay);
}

/// Nodal tensor interpolation of w(x, y).
TwoScaleField interpolate_two_scale(std::shared_ptr<const P1Space> macro,
                                    std::shared_ptr<const P1Space> micro,
                                    const std::function<double(const Vec2&, const Vec2&)>& w);

using TwoScaleFunction = std::function<double(const Vec2& x, const Vec2& y)>;
using TwoScaleGradY = std::function<Vec2(const Vec2& x, const Vec2& y)>;

/// Tensor product of the L2 projection in x and the full-H1 projection in y.
/// The load is assembled with degree-4 rules on both meshes (full tensor
/// quadrature, so cost grows with the product of the quadrature point counts).
TwoScaleField micro_macro_riesz(const TwoScaleFunction& w, const TwoScaleGradY& grad_y_w,
                                std::shared_ptr<const P1Space> macro,
                                std::shared_ptr<const P1Space> micro,
                                const CgOptions& options = {});

/// Same projection for a separable function at time t; the load factorises
/// into per-term macro and micro loads.
TwoScaleField micro_macro_riesz(const SeparableField& w, double t,
                                std::shared_ptr<const P1Space> macro,
                                std::shared_ptr<const P1Space> micro,
                                const CgOptions& options = {});

/// Solves (Kx (x) Ky) vec(beta) = vec(load) as Kx beta Ky = load.
TwoScaleCoeffs<double> solve_kronecker(const SparseOperator& kx, const SparseOperator& ky,
                                       const TwoScaleCoeffs<double>& load,
                                       const CgOptions& options = {});

/// Micro coefficients of row `macro_node` at the Gamma_R vertices (ascending
/// vertex order, see Mesh2D::tagged_vertices).
Eigen::VectorXd trace_values_on_gamma_r(const TwoScaleField& w, int macro_node);

/// CSV with header "macro_node,micro_node,value".
void write_field_csv(std::ostream& out, const TwoScaleField& w);

}  // namespace twoscale
