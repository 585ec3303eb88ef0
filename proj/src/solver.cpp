#include "twoscale/solver.hpp"

#include "twoscale/errors.hpp"
#include "twoscale/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

namespace twoscale {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Picard ? "picard" : "semi_implicit";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "semi_implicit") return Scheme::SemiImplicit;
  if (name == "picard") return Scheme::Picard;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

int SolverConfig::n_steps() const {
  return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

std::vector<std::string> validate(const SolverConfig& cfg) {
  std::vector<std::string> errors;
  if (!(cfg.dt > 0.0)) errors.push_back("dt must be > 0");
  if (!(cfg.T > 0.0)) errors.push_back("T must be > 0");
  if (cfg.dt > 0.0 && cfg.T > 0.0 && cfg.dt > cfg.T) errors.push_back("dt must not exceed T");
  if (!(cfg.picard_tol > 0.0)) errors.push_back("picard_tol must be > 0");
  if (cfg.picard_max < 1) errors.push_back("picard_max must be >= 1");
  if (!(cfg.cg.tol > 0.0)) errors.push_back("cg_tol must be > 0");
  if (cfg.cg.max_iter < 1) errors.push_back("cg_max_iter must be >= 1");
  return errors;
}

State initial_state(const ModelParams& params, const CoupledOperators& ops,
                    std::vector<std::string>* warnings) {
  const Mesh2D& mx = ops.macro->mesh();
  State s;
  s.U.resize(mx.n_vertices());
  int mismatches = 0;
  double worst = 0.0;
  for (int i = 0; i < mx.n_vertices(); ++i) {
    const Vec2& x = mx.vertices()[i];
    const double interior = params.U_I(x);
    if (ops.dirichlet[i]) {
      const double boundary = params.U_ext(0.0, x);
      s.U[i] = boundary;
      const double gap = std::abs(interior - boundary);
      if (gap > 1e-12) {
        ++mismatches;
        worst = std::max(worst, gap);
      }
    } else {
      s.U[i] = interior;
    }
  }
  if (mismatches > 0 && warnings) {
    warnings->push_back("U_I and U_ext(0) disagree at " + std::to_string(mismatches) +
                        " boundary nodes (max gap " + std::to_string(worst) +
                        "); boundary values taken from U_ext");
  }
  s.u = interpolate_two_scale(ops.macro, ops.micro, params.u_I);
  s.v = interpolate_two_scale(ops.macro, ops.micro, params.v_I);
  return s;
}

double max_positive_dt(const ModelParams& params, const CoupledOperators& ops,
                       const LinfBounds& bounds) {
  double limit = std::numeric_limits<double>::infinity();
  const double c = params.b.lipschitz();
  if (c > 0.0) {
    const Eigen::VectorXd bg = lumped_mass(ops.Bg);
    const double ratio = (bg.array() / ops.wy.array()).maxCoeff();
    limit = std::min(limit, 1.0 / (c * ratio));
    limit = std::min(limit, params.theta / (c * ops.gamma_r_length()));
  }
  const auto m = reaction_max_factors(params.R, params.Q, bounds.m2, bounds.m3);
  if (params.k * m.Q_m > 0.0) limit = std::min(limit, 1.0 / (params.k * m.Q_m));
  if (params.alpha * params.k * m.R_m > 0.0) {
    limit = std::min(limit, 1.0 / (params.alpha * params.k * m.R_m));
  }
  return limit;
}

namespace {

SparseMatrix diagonal(const Eigen::VectorXd& d) {
  SparseMatrix out(d.size(), d.size());
  out.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) out.insert(i, i) = d[i];
  out.makeCompressed();
  return out;
}

SparseOperator sym(SparseMatrix m) {
  SparseOperator op;
  op.matrix = std::move(m);
  op.matrix.makeCompressed();
  op.symmetric = true;
  return op;
}

}  // namespace

Stepper::Stepper(ModelParams params, std::shared_ptr<const CoupledOperators> ops, SolverConfig cfg)
    : params_(std::move(params)), ops_(std::move(ops)), cfg_(std::move(cfg)) {
  check_params(params_);
  auto errors = validate(cfg_);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  dt_ = cfg_.step_size();
  const CoupledOperators& o = *ops_;
  macro_time_mass_ = params_.theta * (cfg_.mass_lumping ? diagonal(o.wx) : o.Mx.matrix);
  macro_full_ = macro_time_mass_ + (dt_ * params_.D) * o.Ax.matrix;
  macro_ = std::make_unique<ConstrainedOperator>(sym(macro_full_), o.dirichlet);
  micro_time_mass_ = cfg_.mass_lumping ? diagonal(o.wy) : o.My.matrix;
  micro_u_ = sym(micro_time_mass_ + (dt_ * params_.d1) * o.Ay.matrix);
  micro_v_ = sym(micro_time_mass_ + (dt_ * params_.d2) * o.Ay.matrix);
}

TwoScaleCoeffs<double> Stepper::solve_micro(const SparseOperator& op,
                                            const TwoScaleCoeffs<double>& rhs,
                                            const TwoScaleCoeffs<double>& guess,
                                            int& iterations) const {
  // Columns are macro nodes; each is an independent micro problem.
  const Eigen::MatrixXd b = rhs.transpose();
  Eigen::MatrixXd x = guess.transpose();
  std::atomic<int> worst{0};
  parallel_for(b.cols(), [&](std::size_t begin, std::size_t end) {
    const auto cols = static_cast<Eigen::Index>(end - begin);
    const int it = cg_solve_columns(op, b.middleCols(begin, cols), x.middleCols(begin, cols), cfg_.cg);
    int seen = worst.load();
    while (it > seen && !worst.compare_exchange_weak(seen, it)) {
    }
  });
  iterations = std::max(iterations, worst.load());
  return x.transpose();
}

State Stepper::solve_linear(const State& old, const State& lagged, double t_nonlinear,
                            StepInfo& info) const {
  const CoupledOperators& o = *ops_;
  const double t_new = old.t + dt_;
  ForcingLoads forcing;
  if (cfg_.forcing) forcing = cfg_.forcing->loads(t_new, t_nonlinear);

  State next;
  next.t = t_new;

  Eigen::VectorXd rhs = macro_time_mass_ * old.U;
  rhs.noalias() += dt_ * macro_exchange_rhs(lagged.U, lagged.u, params_.b, o);
  if (cfg_.forcing) rhs.noalias() += dt_ * forcing.macro;
  Eigen::VectorXd values = Eigen::VectorXd::Zero(rhs.size());
  const Mesh2D& mx = o.macro->mesh();
  for (int i = 0; i < mx.n_vertices(); ++i) {
    if (o.dirichlet[i]) values[i] = params_.U_ext(t_new, mx.vertices()[i]);
  }
  next.U = macro_->solve(rhs, values, cfg_.cg);
  const Eigen::VectorXd residual = macro_full_ * next.U - rhs;
  info.boundary_inflow = 0.0;
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    if (o.dirichlet[i]) info.boundary_inflow += residual[i];
  }

  const auto exchange = micro_exchange_rhs(lagged.U, lagged.u, params_.b, o);
  const auto [react_u, react_v] =
      reaction_rhs(lagged.u, lagged.v, params_.R, params_.Q, params_.k, params_.alpha, o);
  const Eigen::VectorXd inv_wx = o.wx.cwiseInverse();

  TwoScaleCoeffs<double> rhs_u = old.u.coeffs() * micro_time_mass_;
  rhs_u.noalias() += dt_ * (inv_wx.asDiagonal() * (exchange + react_u));
  TwoScaleCoeffs<double> rhs_v = old.v.coeffs() * micro_time_mass_;
  rhs_v.noalias() += dt_ * (inv_wx.asDiagonal() * react_v);
  if (cfg_.forcing) {
    rhs_u.noalias() += dt_ * forcing.u;
    rhs_v.noalias() += dt_ * forcing.v;
  }
  next.u = TwoScaleField(o.macro, o.micro, solve_micro(micro_u_, rhs_u, lagged.u.coeffs(), info.cg_iterations));
  next.v = TwoScaleField(o.macro, o.micro, solve_micro(micro_v_, rhs_v, lagged.v.coeffs(), info.cg_iterations));
  return next;
}

State Stepper::step(const State& state, StepInfo* info_out) const {
  const CoupledOperators& o = *ops_;
  if (state.U.size() != o.wx.size() || state.u.n_macro() != o.wx.size() ||
      state.u.n_micro() != o.wy.size() || state.v.n_macro() != o.wx.size() ||
      state.v.n_micro() != o.wy.size()) {
    throw DimensionMismatch("state does not match the operators");
  }
  StepInfo info;
  State next = solve_linear(state, state, state.t, info);
  if (cfg_.scheme == Scheme::Picard) {
    const double t_new = state.t + dt_;
    double distance = 0.0;
    int it = 1;
    for (;; ++it) {
      State iterate = solve_linear(state, next, t_new, info);
      const Eigen::VectorXd dU = iterate.U - next.U;
      distance = std::sqrt(dU.dot(o.Mx.matrix * dU) +
                           std::pow(ts_l2_norm(iterate.u.coeffs() - next.u.coeffs(), o.Mx, o.My), 2) +
                           std::pow(ts_l2_norm(iterate.v.coeffs() - next.v.coeffs(), o.Mx, o.My), 2));
      next = std::move(iterate);
      if (distance < cfg_.picard_tol) break;
      if (it >= cfg_.picard_max) {
        throw SolverError("Picard iteration did not converge", it, distance);
      }
    }
    info.picard_iterations = it;
  }
  if (info_out) *info_out = info;
  return next;
}

State step(const State& state, const ModelParams& params,
           std::shared_ptr<const CoupledOperators> ops, const SolverConfig& cfg) {
  return Stepper(params, std::move(ops), cfg).step(state);
}

double total_v_mass(const State& state, const CoupledOperators& ops) {
  return two_scale_mass(state.v, ops);
}

double macro_mass(const Eigen::VectorXd& U, const CoupledOperators& ops) { return ops.wx.dot(U); }

double two_scale_mass(const TwoScaleField& w, const CoupledOperators& ops) {
  const TwoScaleCoeffs<double> ones = TwoScaleCoeffs<double>::Ones(w.n_macro(), w.n_micro());
  return ts_inner(w.coeffs(), ones, ops.Mx.matrix, ops.My.matrix);
}

SeriesRow series_row(const State& s, const CoupledOperators& ops) {
  return {s.t,
          total_v_mass(s, ops),
          s.U.minCoeff(),
          s.U.maxCoeff(),
          s.u.coeffs().minCoeff(),
          s.u.coeffs().maxCoeff(),
          s.v.coeffs().minCoeff(),
          s.v.coeffs().maxCoeff()};
}

namespace {

int count_violations(const SeriesRow& row, const BoundsCheck& check) {
  const double tol = check.tol;
  int n = 0;
  n += row.min_U < -tol || row.max_U > check.bounds.m1 + tol;
  n += row.min_u < -tol || row.max_u > check.bounds.m2 + tol;
  n += row.min_v < -tol || row.max_v > check.bounds.m3 + tol;
  return n;
}

}  // namespace

RunSummary run(const ModelParams& params, std::shared_ptr<const CoupledOperators> ops,
               const SolverConfig& cfg, const std::vector<Observer>& observers,
               std::optional<State> initial) {
  const Stepper stepper(params, ops, cfg);
  RunSummary summary;
  State state = initial ? std::move(*initial) : initial_state(params, *ops);
  StepInfo info;
  for (const auto& obs : observers) obs(0, state, info);
  if (cfg.check_bounds) summary.bound_violations += count_violations(series_row(state, *ops), *cfg.check_bounds);
  const int n = cfg.n_steps();
  for (int i = 1; i <= n; ++i) {
    state = stepper.step(state, &info);
    summary.max_cg_iterations = std::max(summary.max_cg_iterations, info.cg_iterations);
    summary.max_picard_iterations = std::max(summary.max_picard_iterations, info.picard_iterations);
    summary.boundary_inflow += info.boundary_inflow;
    if (cfg.check_bounds) {
      summary.bound_violations += count_violations(series_row(state, *ops), *cfg.check_bounds);
    }
    for (const auto& obs : observers) obs(i, state, info);
  }
  summary.steps = n;
  summary.final_state = std::move(state);
  return summary;
}

void write_series_header(std::ostream& out) {
  out << "t,total_v,min_U,max_U,min_u,max_u,min_v,max_v\n";
}

void write_series_row(std::ostream& out, const SeriesRow& r) {
  const auto precision = out.precision(17);
  out << r.t << ',' << r.total_v << ',' << r.min_U << ',' << r.max_U << ',' << r.min_u << ','
      << r.max_u << ',' << r.min_v << ',' << r.max_v << '\n';
  out.precision(precision);
}

void write_macro_csv(std::ostream& out, const Eigen::VectorXd& U, const P1Space& space) {
  const auto precision = out.precision(17);
  out << "node,x,y,U\n";
  const auto& v = space.mesh().vertices();
  for (Eigen::Index i = 0; i < U.size(); ++i) {
    out << i << ',' << v[i].x() << ',' << v[i].y() << ',' << U[i] << '\n';
  }
  out.precision(precision);
}

Observer snapshot_writer(const std::string& directory, int stride,
                         std::shared_ptr<const CoupledOperators> ops) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto series = std::make_shared<std::ofstream>(fs::path(directory) / "series.csv");
  if (!*series) throw std::runtime_error("cannot write to " + directory);
  write_series_header(*series);
  return [=](int step, const State& state, const StepInfo&) {
    write_series_row(*series, series_row(state, *ops));
    series->flush();
    if (stride <= 0 || step % stride != 0) return;
    const std::string suffix = "_" + std::to_string(step) + ".csv";
    std::ofstream macro(fs::path(directory) / ("macro" + suffix));
    write_macro_csv(macro, state.U, *ops->macro);
    std::ofstream u(fs::path(directory) / ("u" + suffix));
    write_field_csv(u, state.u);
    std::ofstream v(fs::path(directory) / ("v" + suffix));
    write_field_csv(v, state.v);
  };
}

}  // namespace twoscale
