#pragma once

#include "twoscale/fem.hpp"
#include "twoscale/model.hpp"
#include "twoscale/twoscale.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <vector>

namespace twoscale {

/// Matrices shared by every step of a run on one pair of meshes.
struct CoupledOperators {
  std::shared_ptr<const P1Space> macro;
  std::shared_ptr<const P1Space> micro;
  SparseOperator Mx, Ax;
  SparseOperator My, Ay;
  SparseOperator Bg;           // micro boundary mass on Gamma_R
  Eigen::VectorXd wx;          // row sums of Mx
  Eigen::VectorXd wy;          // row sums of My
  std::vector<bool> dirichlet; // macro vertices carrying U_ext
  /// Gamma_R edges of the micro mesh with their lengths.
  std::vector<std::array<int, 2>> gamma_edges;
  std::vector<double> gamma_lengths;

  double gamma_r_length() const;
};

CoupledOperators make_coupled_operators(std::shared_ptr<const P1Space> macro,
                                        std::shared_ptr<const P1Space> micro);

/// Entry j = -wx_j sum_e |e|/2 (b(U_j - u_jp) + b(U_j - u_jq)) over Gamma_R
/// edges e = (p, q).
Eigen::VectorXd macro_exchange_rhs(const Eigen::VectorXd& U, const TwoScaleField& u,
                                   const TransferFn& b, const CoupledOperators& ops);

/// Row j = wx_j times the trapezoidal Gamma_R load of b(U_j - u_j).
TwoScaleCoeffs<double> micro_exchange_rhs(const Eigen::VectorXd& U, const TwoScaleField& u,
                                          const TransferFn& b, const CoupledOperators& ops);

/// (-k wx_j wy_k eta(u_jk, v_jk), alpha times the same).
std::pair<TwoScaleCoeffs<double>, TwoScaleCoeffs<double>> reaction_rhs(
    const TwoScaleField& u, const TwoScaleField& v, const ReactionFactorFn& R,
    const ReactionFactorFn& Q, double k, double alpha, const CoupledOperators& ops);

}  // namespace twoscale
