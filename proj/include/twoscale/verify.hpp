#pragma once

#include "twoscale/coupling.hpp"
#include "twoscale/expr.hpp"
#include "twoscale/model.hpp"
#include "twoscale/separable.hpp"
#include "twoscale/solver.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace twoscale {

/// Manufactured solution: U(t, x) and U_ext(t, x) as expressions, u and v
/// separable in (t, x, y).
class ExactSolution {
 public:
  ExactSolution();  // identically zero
  ExactSolution(Expr U, Expr U_ext, SeparableField u, SeparableField v);

  double U(double t, const Vec2& x) const;
  double dU_dt(double t, const Vec2& x) const;
  Vec2 grad_U(double t, const Vec2& x) const;
  double laplacian_U(double t, const Vec2& x) const;
  double U_ext(double t, const Vec2& x) const;
  /// U0 = U - U_ext with value, gradient and Hessian (d11, d12, d22).
  double U0(double t, const Vec2& x) const;
  Vec2 grad_U0(double t, const Vec2& x) const;
  Eigen::Vector3d hessian_U0(double t, const Vec2& x) const;

  const SeparableField& u() const { return u_; }
  const SeparableField& v() const { return v_; }
  const Expr& U_expr() const { return U_; }
  const Expr& U_ext_expr() const { return U_ext_; }

  /// Copy of `base` with U_ext, U_I, u_I, v_I taken from this solution.
  ModelParams data(ModelParams base) const;

 private:
  Expr U_, U_ext_, U0_;
  Expr dUdt_, dUdx1_, dUdx2_, lapU_;
  Expr dU0dx1_, dU0dx2_, dU0dx11_, dU0dx12_, dU0dx22_;
  SeparableField u_, v_;
};

/// Manufactured solution used by the convergence suites: smooth, positive,
/// with U - u crossing 0 and 0.5 on Gamma_R = top edge of the unit cell.
ExactSolution default_exact_solution();

/// Forcing making `exact` solve the discrete model. Volume loads use degree
/// 4 rules; the micro loads are evaluated at the macro vertices. The Gamma_R
/// integral inside f_U uses 5-point Gauss on at least 64 sub-segments.
/// Micro boundary residuals d1 grad_y u . n - b(U - u) on Gamma_R and
/// d1 grad_y u . n on Gamma_N enter as boundary loads (same for v with d2
/// and no exchange).
class MmsForcing : public Forcing {
 public:
  MmsForcing(ExactSolution exact, ModelParams params, std::shared_ptr<const CoupledOperators> ops);
  ~MmsForcing() override;

  ForcingLoads loads(double t_linear, double t_nonlinear) const override;

 private:
  struct Tables;
  ExactSolution exact_;
  ModelParams params_;
  std::shared_ptr<const CoupledOperators> ops_;
  std::unique_ptr<Tables> tables_;
};

/// Pointwise residuals (f_U, f_u, f_v) of the model equations at one point.
/// f_U contains the Gamma_R integral, computed with `gamma_points` Gauss
/// points per Gamma_R edge of `micro`.
struct PointForcing {
  double f_U, f_u, f_v;
};
PointForcing mms_forcing(const ExactSolution& exact, const ModelParams& params, const P1Space& micro,
                         double t, const Vec2& x, const Vec2& y, int gamma_points = 5);

/// L2 and H1_y seminorm errors of a discrete two-scale field against a
/// separable function. The error is split as (beta - I u) + (I u - u) with
/// the nodal interpolant I u, so no large quantities cancel.
class SeparableErrors {
 public:
  SeparableErrors(const SeparableField& field, std::shared_ptr<const P1Space> macro,
                  std::shared_ptr<const P1Space> micro, int degree = 6);

  /// Squared (L2, H1_y seminorm) errors of beta against the field at time
  /// factors tau.
  std::pair<double, double> squared(const TwoScaleCoeffs<double>& beta,
                                    const Eigen::VectorXd& tau) const;
  std::pair<double, double> squared_at(const TwoScaleCoeffs<double>& beta, double t) const;

 private:
  SeparableField field_;
  SparseOperator mx_, my_, ay_;
  Eigen::MatrixXd a_, b_;             // nodal values of the factors (m x Nx, m x Ny)
  Eigen::MatrixXd lx_, lax_;          // macro loads of X_i and of I X_i - X_i
  Eigen::MatrixXd mb_, ab_;           // My b_i and Ay b_i
  Eigen::MatrixXd lby_, gby_;         // micro loads of I Y_i - Y_i and its gradient
  Eigen::MatrixXd rest_l2_, rest_h1_; // Gram matrices of I(X_i Y_i) - X_i Y_i
};

/// Time-integrated errors of a run: sqrt(sum_n dt |e(t_n)|^2), n >= 1.
struct SpaceTimeErrors {
  double U_H1 = 0.0, U_L2 = 0.0;
  double u_L2H1y = 0.0, u_L2 = 0.0;
  double v_L2H1y = 0.0, v_L2 = 0.0;

  double combined_squared() const { return U_H1 * U_H1 + u_L2H1y * u_L2H1y + v_L2H1y * v_L2H1y; }
};

/// Observer accumulating SpaceTimeErrors. The U error is measured by
/// degree-6 quadrature of U - U^h; micro errors use the H1_y composite
/// (L2 + seminorm).
class ErrorAccumulator {
 public:
  ErrorAccumulator(ExactSolution exact, std::shared_ptr<const CoupledOperators> ops,
                   double dt);

  Observer observer();
  void add(const State& state);
  SpaceTimeErrors result() const;

 private:
  ExactSolution exact_;
  std::shared_ptr<const CoupledOperators> ops_;
  double dt_;
  std::shared_ptr<SeparableErrors> u_err_, v_err_;
  double sums_[6] = {0, 0, 0, 0, 0, 0};
};

/// Runs the solver on `ops` with the MMS forcing of `exact` and returns the
/// space-time errors.
SpaceTimeErrors space_time_error(const ExactSolution& exact, const ModelParams& params,
                                 std::shared_ptr<const CoupledOperators> ops, SolverConfig cfg);

struct EocRow {
  int nx = 0;
  double h = 0.0, dt = 0.0;
  SpaceTimeErrors err;
  int steps = 0;
};

struct EocTable {
  std::vector<EocRow> rows;
  std::vector<std::string> warnings;

  /// log2(e_prev / e_curr) for the selected error; size rows() - 1.
  std::vector<double> rates(double SpaceTimeErrors::*field) const;
  std::vector<double> combined_rates() const;
  void write_csv(std::ostream& out) const;
  /// "h error" two-column file for one norm.
  void write_h_error(std::ostream& out, double SpaceTimeErrors::*field) const;
};

struct EocOptions {
  int base_nx = 4;   // macro and micro cells per side on level 0
  int levels = 4;
  double dt_constant = 0.1;
  double dt_power = 2.0;  // dt = c h^p
  double T = 0.025;
  SolverConfig solver;    // dt and T are overwritten per level
  std::string gamma_r = "top_edge";
};

EocTable run_eoc(const ExactSolution& exact, const ModelParams& params, const EocOptions& options);

/// Unit-square macro and micro operators with nx cells per side.
std::shared_ptr<const CoupledOperators> unit_square_ops(int nx, int ny,
                                                        const std::string& gamma_r = "top_edge");

struct InterpolationRow {
  int nx = 0;
  double h = 0.0;
  double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;  // projection errors
};

struct InterpolationReport {
  std::vector<InterpolationRow> rows;
  double norm_macro_h2 = 0.0;     // |phi|_{H2(Omega)}
  double norm_two_scale = 0.0;    // |phi|_{L2(Omega;H2(Y)) cap L2(Y;H2(Omega))}
  double rate[4] = {0, 0, 0, 0};  // least-squares slopes of log error vs log h
  double gamma[4] = {0, 0, 0, 0}; // fitted constants with the nominal slopes 2,1,2,1
  bool saturated[4] = {false, false, false, false};

  void write_csv(std::ostream& out) const;
};

/// Macro Riesz projection (zero Dirichlet data) of phi and micro-macro
/// Riesz projection of the separable phi2 on unit squares with
/// nx = base_nx 2^l, l < levels.
InterpolationReport interpolation_rate_test(const Expr& phi, const SeparableField& phi2,
                                            int base_nx = 4, int levels = 4);

/// Least-squares slope of log(e) against log(h).
double fitted_rate(const std::vector<double>& h, const std::vector<double>& e);

struct BoundsRow {
  int step = 0;
  SeriesRow values;
  int violations = 0;
};

/// Observer recording per-step extrema and excursions outside
/// [-tol, m + tol].
class BoundsMonitor {
 public:
  BoundsMonitor(std::shared_ptr<const CoupledOperators> ops, LinfBounds bounds, double tol);

  Observer observer();
  const std::vector<BoundsRow>& rows() const { return rows_; }
  int violations() const;
  void write_csv(std::ostream& out) const;

 private:
  std::shared_ptr<const CoupledOperators> ops_;
  LinfBounds bounds_;
  double tol_;
  std::vector<BoundsRow> rows_;
};

struct TraceRow {
  double epsilon = 0.0;
  double constant = 0.0;  // smallest C with |phi|^2_{Gamma_R} <= eps |grad_y phi|^2 + C |phi|^2
};

std::vector<TraceRow> trace_inequality_check(const std::vector<TwoScaleField>& samples,
                                             const std::vector<double>& epsilons,
                                             const CoupledOperators& ops);

/// Random smooth two-scale fields: sums of four products of low-frequency
/// cosines in x and y with random amplitudes, frequencies and phases.
std::vector<TwoScaleField> random_smooth_fields(const CoupledOperators& ops, int count,
                                                unsigned seed);

struct KEstimate {
  double u_X_sq = 0.0, v_X_sq = 0.0;  // L2(S; L2(Omega; H2(Y)))^2
  double U0_H2_sq = 0.0;              // L2(S; H2(Omega))^2
  double gamma1 = 0.0, gamma3 = 0.0;
  double R_m = 0.0, Q_m = 0.0;
  double value = 0.0;
};

/// Norms by composite Gauss-Legendre in time (`time_intervals` x 5 points)
/// and degree-6 quadrature on the given spaces.
KEstimate estimate_K(const ExactSolution& exact, const ModelParams& params, double T,
                     double gamma1, double gamma3, const ReactionMax& maxima,
                     const P1Space& macro, const P1Space& micro, int time_intervals = 8);

/// The constant of the error bound from its ingredients.
double k_constant(double gamma1, double gamma3, double theta, double k, double alpha, double c_R,
                  double c_Q, double R_m, double Q_m, double U0_H2_sq, double uv_X_sq);

void write_k_csv(std::ostream& out, const KEstimate& K);

/// h^2 max(gamma1, gamma3) < 1
bool small_mesh_condition(double h, double gamma1, double gamma3);

}  // namespace twoscale
