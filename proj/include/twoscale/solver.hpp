#pragma once

#include "twoscale/coupling.hpp"
#include "twoscale/model.hpp"
#include "twoscale/twoscale.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace twoscale {

struct State {
  double t = 0.0;
  Eigen::VectorXd U;
  TwoScaleField u;
  TwoScaleField v;
};

enum class Scheme { SemiImplicit, Picard };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Extra loads for one step. macro_load[j] = int f_U xi_j. Row j of u and v
/// is the micro load attached to macro node j, without the macro weight wx_j.
struct ForcingLoads {
  Eigen::VectorXd macro;
  TwoScaleCoeffs<double> u;
  TwoScaleCoeffs<double> v;
};

class Forcing {
 public:
  virtual ~Forcing() = default;
  /// Linear parts are evaluated at t_linear, the parts that balance the
  /// nonlinear exchange and reaction terms at t_nonlinear.
  virtual ForcingLoads loads(double t_linear, double t_nonlinear) const = 0;
};

struct BoundsCheck {
  LinfBounds bounds;
  double tol = 1e-10;
};

struct SolverConfig {
  double dt = 1e-3;
  double T = 0.1;
  Scheme scheme = Scheme::SemiImplicit;
  double picard_tol = 1e-10;
  int picard_max = 50;
  CgOptions cg{1e-12, 20000};
  /// Row-sum mass in the time derivative of all three equations. Together
  /// with the step restriction of max_positive_dt this keeps the state
  /// inside the bounds of linf_bounds.
  bool mass_lumping = false;
  std::shared_ptr<const Forcing> forcing;
  std::optional<BoundsCheck> check_bounds;

  /// Number of uniform steps; the step is T / n_steps(), which equals dt
  /// when T is a multiple of dt.
  int n_steps() const;
  double step_size() const { return T / n_steps(); }
};

std::vector<std::string> validate(const SolverConfig& cfg);

/// U from U_I with boundary values from U_ext(0); u, v by nodal tensor
/// interpolation. Boundary mismatches beyond 1e-12 between U_I and U_ext(0)
/// are reported through `warnings`.
State initial_state(const ModelParams& params, const CoupledOperators& ops,
                    std::vector<std::string>* warnings = nullptr);

struct StepInfo {
  int cg_iterations = 0;
  int picard_iterations = 0;
  /// Mass entering Omega through the Dirichlet boundary during the step,
  /// read off the residuals of the constrained rows.
  double boundary_inflow = 0.0;
};

/// Step-size limit under which the lumped semi-implicit scheme keeps
/// nonnegative data nonnegative and bounded:
///   dt c_hat max_k(Bg row sum / wy) <= 1,  dt c_hat |Gamma_R| <= theta,
///   dt k Q_m <= 1,  dt alpha k R_m <= 1.
double max_positive_dt(const ModelParams& params, const CoupledOperators& ops,
                       const LinfBounds& bounds);

/// Precomputed step operators for one (params, ops, dt) triple.
class Stepper {
 public:
  Stepper(ModelParams params, std::shared_ptr<const CoupledOperators> ops, SolverConfig cfg);

  State step(const State& state, StepInfo* info = nullptr) const;

  const ModelParams& params() const { return params_; }
  const CoupledOperators& ops() const { return *ops_; }
  const SolverConfig& config() const { return cfg_; }
  double dt() const { return dt_; }

 private:
  State solve_linear(const State& old, const State& lagged, double t_nonlinear,
                     StepInfo& info) const;
  TwoScaleCoeffs<double> solve_micro(const SparseOperator& op, const TwoScaleCoeffs<double>& rhs,
                                     const TwoScaleCoeffs<double>& guess, int& iterations) const;

  ModelParams params_;
  std::shared_ptr<const CoupledOperators> ops_;
  SolverConfig cfg_;
  double dt_;
  SparseMatrix macro_time_mass_;  // theta * Mx or its lumped version
  SparseMatrix macro_full_;       // theta M + dt D Ax before elimination
  std::unique_ptr<ConstrainedOperator> macro_;
  SparseMatrix micro_time_mass_;
  SparseOperator micro_u_, micro_v_;
};

State step(const State& state, const ModelParams& params,
           std::shared_ptr<const CoupledOperators> ops, const SolverConfig& cfg);

/// vec(beta_v)' (Mx (x) My) 1
double total_v_mass(const State& state, const CoupledOperators& ops);
/// int_Omega U
double macro_mass(const Eigen::VectorXd& U, const CoupledOperators& ops);
/// int_{Omega x Y} w
double two_scale_mass(const TwoScaleField& w, const CoupledOperators& ops);

/// Called after every step (step index from 1) and once with index 0 for
/// the initial state.
using Observer = std::function<void(int step, const State& state, const StepInfo& info)>;

struct RunSummary {
  State final_state;
  int steps = 0;
  int max_cg_iterations = 0;
  int max_picard_iterations = 0;
  int bound_violations = 0;
  double boundary_inflow = 0.0;  // accumulated
};

RunSummary run(const ModelParams& params, std::shared_ptr<const CoupledOperators> ops,
               const SolverConfig& cfg, const std::vector<Observer>& observers = {},
               std::optional<State> initial = std::nullopt);

struct SeriesRow {
  double t, total_v, min_U, max_U, min_u, max_u, min_v, max_v;
};

SeriesRow series_row(const State& state, const CoupledOperators& ops);
void write_series_header(std::ostream& out);
void write_series_row(std::ostream& out, const SeriesRow& row);
/// "node,x,y,U"
void write_macro_csv(std::ostream& out, const Eigen::VectorXd& U, const P1Space& space);

/// Observer writing series.csv every step and macro/u/v snapshots every
/// `stride` steps into `directory`.
Observer snapshot_writer(const std::string& directory, int stride,
                         std::shared_ptr<const CoupledOperators> ops);

}  // namespace twoscale
