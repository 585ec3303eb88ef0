#include "twoscale/coupling.hpp"

#include "twoscale/errors.hpp"
#include "twoscale/parallel.hpp"

namespace twoscale {

double CoupledOperators::gamma_r_length() const {
  double sum = 0.0;
  for (double l : gamma_lengths) sum += l;
  return sum;
}

CoupledOperators make_coupled_operators(std::shared_ptr<const P1Space> macro,
                                        std::shared_ptr<const P1Space> micro) {
  if (!micro->mesh().is_micro()) {
    throw InvalidTagging("micro space needs a mesh tagged with Gamma_R/Gamma_N");
  }
  CoupledOperators ops;
  ops.macro = macro;
  ops.micro = micro;
  ops.Mx = assemble_mass(*macro);
  ops.Ax = assemble_stiffness(*macro);
  ops.My = assemble_mass(*micro);
  ops.Ay = assemble_stiffness(*micro);
  ops.Bg = assemble_boundary_mass(*micro, BoundaryTag::GammaR);
  ops.wx = lumped_mass(ops.Mx);
  ops.wy = lumped_mass(ops.My);
  ops.dirichlet = macro->dirichlet_mask();
  const Mesh2D& my = micro->mesh();
  for (const auto& e : my.boundary_edges()) {
    if (e.tag != BoundaryTag::GammaR) continue;
    ops.gamma_edges.push_back(e.vertices);
    ops.gamma_lengths.push_back((my.vertices()[e.vertices[1]] - my.vertices()[e.vertices[0]]).norm());
  }
  return ops;
}

namespace {

void check_dims(const Eigen::VectorXd& U, const TwoScaleField& u, const CoupledOperators& ops) {
  if (U.size() != ops.wx.size() || u.n_macro() != ops.wx.size() || u.n_micro() != ops.wy.size()) {
    throw DimensionMismatch("coupling inputs do not match the operators");
  }
}

// Trapezoidal Gamma_R load of y -> b(U_j - u_j(y)), without the wx_j factor.
template <typename Row, typename Out>
void exchange_row(double Uj, const Row& uj, const TransferFn& b, const CoupledOperators& ops,
                  Out&& out) {
  for (std::size_t e = 0; e < ops.gamma_edges.size(); ++e) {
    const auto [p, q] = ops.gamma_edges[e];
    const double half = 0.5 * ops.gamma_lengths[e];
    out(p, half * b(Uj - uj(p)));
    out(q, half * b(Uj - uj(q)));
  }
}

}  // namespace

Eigen::VectorXd macro_exchange_rhs(const Eigen::VectorXd& U, const TwoScaleField& u,
                                   const TransferFn& b, const CoupledOperators& ops) {
  check_dims(U, u, ops);
  Eigen::VectorXd out(U.size());
  parallel_for(U.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      double sum = 0.0;
      exchange_row(U[j], u.coeffs().row(j), b, ops, [&](int, double value) { sum += value; });
      out[j] = -ops.wx[j] * sum;
    }
  });
  return out;
}

TwoScaleCoeffs<double> micro_exchange_rhs(const Eigen::VectorXd& U, const TwoScaleField& u,
                                          const TransferFn& b, const CoupledOperators& ops) {
  check_dims(U, u, ops);
  TwoScaleCoeffs<double> out = TwoScaleCoeffs<double>::Zero(u.n_macro(), u.n_micro());
  parallel_for(U.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const double w = ops.wx[j];
      exchange_row(U[j], u.coeffs().row(j), b, ops,
                   [&](int k, double value) { out(j, k) += w * value; });
    }
  });
  return out;
}

std::pair<TwoScaleCoeffs<double>, TwoScaleCoeffs<double>> reaction_rhs(
    const TwoScaleField& u, const TwoScaleField& v, const ReactionFactorFn& R,
    const ReactionFactorFn& Q, double k, double alpha, const CoupledOperators& ops) {
  if (u.n_macro() != ops.wx.size() || u.n_micro() != ops.wy.size() ||
      v.n_macro() != u.n_macro() || v.n_micro() != u.n_micro()) {
    throw DimensionMismatch("reaction inputs do not match the operators");
  }
  TwoScaleCoeffs<double> ru(u.n_macro(), u.n_micro());
  parallel_for(u.n_macro(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const double scale = -k * ops.wx[j];
      for (Eigen::Index m = 0; m < u.n_micro(); ++m) {
        ru(j, m) = scale * ops.wy[m] * eval_eta(R, Q, u.coeffs()(j, m), v.coeffs()(j, m));
      }
    }
  });
  TwoScaleCoeffs<double> rv = alpha * ru;
  return {std::move(ru), std::move(rv)};
}

}  // namespace twoscale
