#include "twoscale/verify.hpp"

#include "twoscale/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace twoscale {

// ---------------------------------------------------------------- errors

ErrorAccumulator::ErrorAccumulator(ExactSolution exact, std::shared_ptr<const CoupledOperators> ops,
                                   double dt)
    : exact_(std::move(exact)), ops_(std::move(ops)), dt_(dt) {
  u_err_ = std::make_shared<SeparableErrors>(exact_.u(), ops_->macro, ops_->micro);
  v_err_ = std::make_shared<SeparableErrors>(exact_.v(), ops_->macro, ops_->micro);
}

Observer ErrorAccumulator::observer() {
  return [this](int step, const State& state, const StepInfo&) {
    if (step > 0) add(state);
  };
}

void ErrorAccumulator::add(const State& s) {
  const double t = s.t;
  const Norms eU = error_norms(
      *ops_->macro, s.U, [&](const Vec2& x) { return exact_.U(t, x); },
      [&](const Vec2& x) { return exact_.grad_U(t, x); }, 6);
  const auto [ul2, uh1] = u_err_->squared_at(s.u.coeffs(), t);
  const auto [vl2, vh1] = v_err_->squared_at(s.v.coeffs(), t);
  const double sq[6] = {eU.l2 * eU.l2 + eU.h1_semi * eU.h1_semi, eU.l2 * eU.l2, ul2 + uh1, ul2,
                        vl2 + vh1, vl2};
  for (int i = 0; i < 6; ++i) sums_[i] += dt_ * sq[i];
}

SpaceTimeErrors ErrorAccumulator::result() const {
  SpaceTimeErrors e;
  e.U_H1 = std::sqrt(sums_[0]);
  e.U_L2 = std::sqrt(sums_[1]);
  e.u_L2H1y = std::sqrt(sums_[2]);
  e.u_L2 = std::sqrt(sums_[3]);
  e.v_L2H1y = std::sqrt(sums_[4]);
  e.v_L2 = std::sqrt(sums_[5]);
  return e;
}

SpaceTimeErrors space_time_error(const ExactSolution& exact, const ModelParams& params,
                                 std::shared_ptr<const CoupledOperators> ops, SolverConfig cfg) {
  const ModelParams data = exact.data(params);
  cfg.forcing = std::make_shared<MmsForcing>(exact, data, ops);
  ErrorAccumulator acc(exact, ops, cfg.step_size());
  run(data, ops, cfg, {acc.observer()});
  return acc.result();
}

// ---------------------------------------------------------------- EOC

std::shared_ptr<const CoupledOperators> unit_square_ops(int nx, int ny, const std::string& gamma_r) {
  const Vec2 lo(0, 0), hi(1, 1);
  auto macro = std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(make_rect_mesh(lo, hi, nx, nx)));
  auto micro = std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(
      tag_boundary(make_rect_mesh(lo, hi, ny, ny), gamma_r_preset(gamma_r, lo, hi))));
  return std::make_shared<const CoupledOperators>(make_coupled_operators(macro, micro));
}

double fitted_rate(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = std::min(h.size(), e.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> EocTable::rates(double SpaceTimeErrors::*field) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    out.push_back(std::log2(rows[i - 1].err.*field / rows[i].err.*field));
  }
  return out;
}

std::vector<double> EocTable::combined_rates() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    out.push_back(0.5 * std::log2(rows[i - 1].err.combined_squared() / rows[i].err.combined_squared()));
  }
  return out;
}

namespace {

constexpr double SpaceTimeErrors::*kColumns[] = {
    &SpaceTimeErrors::U_H1, &SpaceTimeErrors::u_L2H1y, &SpaceTimeErrors::v_L2H1y,
    &SpaceTimeErrors::U_L2, &SpaceTimeErrors::u_L2,    &SpaceTimeErrors::v_L2};

}  // namespace

void EocTable::write_csv(std::ostream& out) const {
  const auto precision = out.precision(10);
  out << "nx,h,dt,steps,e_U_H1,e_u_L2H1y,e_v_L2H1y,e_U_L2,e_u_L2,e_v_L2,"
         "rate_U_H1,rate_u_L2H1y,rate_v_L2H1y,rate_U_L2,rate_u_L2,rate_v_L2,combined_sq\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << r.nx << ',' << r.h << ',' << r.dt << ',' << r.steps;
    for (auto c : kColumns) out << ',' << r.err.*c;
    for (auto c : kColumns) {
      out << ',';
      if (i > 0) out << std::log2(rows[i - 1].err.*c / r.err.*c);
    }
    out << ',' << r.err.combined_squared() << '\n';
  }
  out.precision(precision);
}

void EocTable::write_h_error(std::ostream& out, double SpaceTimeErrors::*field) const {
  const auto precision = out.precision(10);
  for (const auto& r : rows) out << r.h << ' ' << r.err.*field << '\n';
  out.precision(precision);
}

EocTable run_eoc(const ExactSolution& exact, const ModelParams& params, const EocOptions& options) {
  if (options.levels < 3) throw PreconditionError("run_eoc needs at least 3 levels");
  EocTable table;
  if (options.dt_power < 2.0) {
    table.warnings.push_back("dt = c h^" + std::to_string(options.dt_power) +
                             " is coarser than c h^2: temporal error may pollute the rates");
  }
  for (int level = 0; level < options.levels; ++level) {
    const int n = options.base_nx << level;
    auto ops = unit_square_ops(n, n, options.gamma_r);
    EocRow row;
    row.nx = n;
    row.h = std::max(mesh_size(ops->macro->mesh()), mesh_size(ops->micro->mesh()));
    SolverConfig cfg = options.solver;
    cfg.T = options.T;
    cfg.dt = std::min(options.dt_constant * std::pow(row.h, options.dt_power), options.T);
    row.steps = cfg.n_steps();
    row.dt = cfg.step_size();
    row.err = space_time_error(exact, params, ops, cfg);
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------- interpolation

namespace {

struct Grams {
  Eigen::MatrixXd l2, grad, hess;  // inner products of factors and derivatives
};

template <typename Value, typename Grad, typename Hess>
Grams grams(const P1Space& space, std::size_t m, const Value& value, const Grad& grad,
            const Hess& hess, int degree = 6) {
  Grams g;
  g.l2 = Eigen::MatrixXd::Zero(m, m);
  g.grad = Eigen::MatrixXd::Zero(m, m);
  g.hess = Eigen::MatrixXd::Zero(m, m);
  const Mesh2D& mesh = space.mesh();
  const auto rule = triangle_rule(degree);
  Eigen::VectorXd f(m);
  Eigen::MatrixXd df(m, 2), hf(m, 3);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& v = mesh.vertices();
    for (const auto& q : rule) {
      const Vec2 p = q.bary[0] * v[tri[0]] + q.bary[1] * v[tri[1]] + q.bary[2] * v[tri[2]];
      const double w = q.weight * mesh.triangle_area(t);
      for (std::size_t i = 0; i < m; ++i) {
        f[i] = value(i, p);
        df.row(i) = grad(i, p).transpose();
        const Eigen::Vector3d h = hess(i, p);
        hf.row(i) << h[0], std::sqrt(2.0) * h[1], h[2];
      }
      g.l2.noalias() += w * f * f.transpose();
      g.grad.noalias() += w * df * df.transpose();
      g.hess.noalias() += w * hf * hf.transpose();
    }
  }
  return g;
}

Grams macro_grams(const SeparableField& f, const P1Space& space) {
  return grams(
      space, f.size(), [&](std::size_t i, const Vec2& x) { return f.macro_factor(i, x); },
      [&](std::size_t i, const Vec2& x) { return f.macro_gradient(i, x); },
      [&](std::size_t i, const Vec2& x) { return f.macro_hessian(i, x); });
}

Grams micro_grams(const SeparableField& f, const P1Space& space) {
  return grams(
      space, f.size(), [&](std::size_t i, const Vec2& y) { return f.micro_factor(i, y); },
      [&](std::size_t i, const Vec2& y) { return f.micro_gradient(i, y); },
      [&](std::size_t i, const Vec2& y) { return f.micro_hessian(i, y); });
}

std::shared_ptr<const P1Space> unit_space(int n, bool micro) {
  const Vec2 lo(0, 0), hi(1, 1);
  Mesh2D mesh = make_rect_mesh(lo, hi, n, n);
  if (micro) mesh = tag_boundary(mesh, gamma_r_preset("top_edge", lo, hi));
  return std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(std::move(mesh)));
}

}  // namespace

void InterpolationReport::write_csv(std::ostream& out) const {
  const auto precision = out.precision(10);
  out << "nx,h,i1,i2,i3,i4\n";
  for (const auto& r : rows) {
    out << r.nx << ',' << r.h << ',' << r.i1 << ',' << r.i2 << ',' << r.i3 << ',' << r.i4 << '\n';
  }
  out << "rate,," << rate[0] << ',' << rate[1] << ',' << rate[2] << ',' << rate[3] << '\n';
  out << "gamma,," << gamma[0] << ',' << gamma[1] << ',' << gamma[2] << ',' << gamma[3] << '\n';
  out.precision(precision);
}

InterpolationReport interpolation_rate_test(const Expr& phi, const SeparableField& phi2, int base_nx,
                                            int levels) {
  InterpolationReport report;
  const Expr p1 = phi.diff(Var::x1), p2 = phi.diff(Var::x2);
  const Expr p11 = p1.diff(Var::x1), p12 = p1.diff(Var::x2), p22 = p2.diff(Var::x2);
  auto at = [](const Expr& e, const Vec2& x) { return e(0.0, x.x(), x.y()); };
  const ScalarField f = [&](const Vec2& x) { return at(phi, x); };
  const VectorField grad_f = [&](const Vec2& x) { return Vec2(at(p1, x), at(p2, x)); };

  // Norms of the data on a fine reference mesh.
  {
    const auto fine = unit_space(64, true);
    const auto m = fine->mesh();
    double sq = 0.0;
    const auto rule = triangle_rule(6);
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto& tri = m.triangles()[t];
      for (const auto& q : rule) {
        const Vec2 x = q.bary[0] * m.vertices()[tri[0]] + q.bary[1] * m.vertices()[tri[1]] +
                       q.bary[2] * m.vertices()[tri[2]];
        const double a = at(phi, x), b = at(p1, x), c = at(p2, x);
        const double d = at(p11, x), e = at(p12, x), g = at(p22, x);
        sq += q.weight * m.triangle_area(t) * (a * a + b * b + c * c + d * d + 2 * e * e + g * g);
      }
    }
    report.norm_macro_h2 = std::sqrt(sq);
    const Eigen::VectorXd tau = phi2.time_factors(0.0);
    const Grams gx = macro_grams(phi2, *fine), gy = micro_grams(phi2, *fine);
    const Eigen::MatrixXd y_h2 = gx.l2.cwiseProduct(gy.l2 + gy.grad + gy.hess);
    const Eigen::MatrixXd x_h2 = gy.l2.cwiseProduct(gx.l2 + gx.grad + gx.hess);
    report.norm_two_scale = std::sqrt(tau.dot(y_h2 * tau) + tau.dot(x_h2 * tau));
  }

  const CgOptions cg{1e-11, 20000};
  std::vector<double> hs, e[4];
  for (int level = 0; level < levels; ++level) {
    const int n = base_nx << level;
    const auto macro = unit_space(n, false), micro = unit_space(n, true);
    InterpolationRow row;
    row.nx = n;
    row.h = std::max(mesh_size(macro->mesh()), mesh_size(micro->mesh()));
    const Eigen::VectorXd c = h1_riesz_projection(*macro, f, grad_f, RieszVariant::DirichletZero, cg);
    const Norms err = error_norms(*macro, c, f, grad_f, 6);
    row.i1 = err.l2;
    row.i2 = std::hypot(err.l2, err.h1_semi);
    const TwoScaleField w = micro_macro_riesz(phi2, 0.0, macro, micro, cg);
    const auto [l2, semi] = SeparableErrors(phi2, macro, micro).squared_at(w.coeffs(), 0.0);
    row.i3 = std::sqrt(l2);
    row.i4 = std::sqrt(l2 + semi);
    report.rows.push_back(row);
    hs.push_back(row.h);
    e[0].push_back(row.i1);
    e[1].push_back(row.i2);
    e[2].push_back(row.i3);
    e[3].push_back(row.i4);
  }
  const double nominal[4] = {2, 1, 2, 1};
  const double norm[4] = {report.norm_macro_h2, report.norm_macro_h2, report.norm_two_scale,
                          report.norm_two_scale};
  for (int i = 0; i < 4; ++i) {
    report.saturated[i] = *std::max_element(e[i].begin(), e[i].end()) < 1e-10;
    report.rate[i] = fitted_rate(hs, e[i]);
    double mean = 0.0;
    for (std::size_t l = 0; l < hs.size(); ++l) {
      mean += std::log(e[i][l] / (std::pow(hs[l], nominal[i]) * norm[i]));
    }
    report.gamma[i] = std::exp(mean / hs.size());
  }
  return report;
}

// ---------------------------------------------------------------- bounds

BoundsMonitor::BoundsMonitor(std::shared_ptr<const CoupledOperators> ops, LinfBounds bounds, double tol)
    : ops_(std::move(ops)), bounds_(bounds), tol_(tol) {}

Observer BoundsMonitor::observer() {
  return [this](int step, const State& state, const StepInfo&) {
    BoundsRow row;
    row.step = step;
    row.values = series_row(state, *ops_);
    const auto& r = row.values;
    row.violations = (r.min_U < -tol_ || r.max_U > bounds_.m1 + tol_) +
                     (r.min_u < -tol_ || r.max_u > bounds_.m2 + tol_) +
                     (r.min_v < -tol_ || r.max_v > bounds_.m3 + tol_);
    rows_.push_back(row);
  };
}

int BoundsMonitor::violations() const {
  int n = 0;
  for (const auto& r : rows_) n += r.violations;
  return n;
}

void BoundsMonitor::write_csv(std::ostream& out) const {
  const auto precision = out.precision(17);
  out << "step,t,min_U,max_U,min_u,max_u,min_v,max_v,violations\n";
  for (const auto& row : rows_) {
    const auto& r = row.values;
    out << row.step << ',' << r.t << ',' << r.min_U << ',' << r.max_U << ',' << r.min_u << ','
        << r.max_u << ',' << r.min_v << ',' << r.max_v << ',' << row.violations << '\n';
  }
  out.precision(precision);
}

// ---------------------------------------------------------------- trace

std::vector<TraceRow> trace_inequality_check(const std::vector<TwoScaleField>& samples,
                                             const std::vector<double>& epsilons,
                                             const CoupledOperators& ops) {
  std::vector<TraceRow> out;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw PreconditionError("trace check needs epsilon > 0");
    TraceRow row;
    row.epsilon = eps;
    for (const auto& phi : samples) {
      const auto& b = phi.coeffs();
      const double boundary = ts_inner(b, b, ops.Mx.matrix, ops.Bg.matrix);
      const double grad = ts_inner(b, b, ops.Mx.matrix, ops.Ay.matrix);
      const double bulk = ts_inner(b, b, ops.Mx.matrix, ops.My.matrix);
      if (bulk <= 0.0) continue;
      row.constant = std::max(row.constant, (boundary - eps * grad) / bulk);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<TwoScaleField> random_smooth_fields(const CoupledOperators& ops, int count,
                                                unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amplitude(-1.0, 1.0), phase(0.0, 2.0 * M_PI);
  std::uniform_int_distribution<int> freq(0, 3);
  const auto& xs = ops.macro->mesh().vertices();
  const auto& ys = ops.micro->mesh().vertices();
  auto wave = [&](const std::vector<Vec2>& pts) {
    const double p = freq(rng) * M_PI, q = freq(rng) * M_PI, s = phase(rng);
    Eigen::VectorXd w(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) w[i] = std::cos(p * pts[i].x() + q * pts[i].y() + s);
    return w;
  };
  std::vector<TwoScaleField> out;
  for (int n = 0; n < count; ++n) {
    TwoScaleField f(ops.macro, ops.micro);
    for (int term = 0; term < 4; ++term) {
      const double a = amplitude(rng);
      const Eigen::VectorXd wx = wave(xs);
      f.coeffs() += a * wx * wave(ys).transpose();
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------- K

double k_constant(double gamma1, double gamma3, double theta, double k, double alpha, double c_R,
                  double c_Q, double R_m, double Q_m, double U0_H2_sq, double uv_X_sq) {
  return 0.5 * gamma3 * uv_X_sq + 0.5 * gamma1 * theta * U0_H2_sq +
         3.0 * k * gamma3 * (1.0 + alpha) * (Q_m * c_R + R_m * c_Q) * uv_X_sq;
}

KEstimate estimate_K(const ExactSolution& exact, const ModelParams& params, double T, double gamma1,
                     double gamma3, const ReactionMax& maxima, const P1Space& macro,
                     const P1Space& micro, int time_intervals) {
  KEstimate K;
  K.gamma1 = gamma1;
  K.gamma3 = gamma3;
  K.R_m = maxima.R_m;
  K.Q_m = maxima.Q_m;
  auto x_norm = [&](const SeparableField& f) {
    const Grams gx = macro_grams(f, macro), gy = micro_grams(f, micro);
    return Eigen::MatrixXd(gx.l2.cwiseProduct(gy.l2 + gy.grad + gy.hess));
  };
  const Eigen::MatrixXd gu = x_norm(exact.u()), gv = x_norm(exact.v());
  const Mesh2D& mesh = macro.mesh();
  const auto rule = triangle_rule(6);
  const auto time_rule = line_rule(5);
  const double span = T / time_intervals;
  for (int i = 0; i < time_intervals; ++i) {
    for (const auto& g : time_rule) {
      const double t = (i + g.s) * span;
      const double w = g.weight * span;
      const Eigen::VectorXd tu = exact.u().time_factors(t), tv = exact.v().time_factors(t);
      K.u_X_sq += w * tu.dot(gu * tu);
      K.v_X_sq += w * tv.dot(gv * tv);
      double sq = 0.0;
      for (int tri = 0; tri < mesh.n_triangles(); ++tri) {
        const auto& ids = mesh.triangles()[tri];
        for (const auto& q : rule) {
          const Vec2 x = q.bary[0] * mesh.vertices()[ids[0]] + q.bary[1] * mesh.vertices()[ids[1]] +
                         q.bary[2] * mesh.vertices()[ids[2]];
          const double u0 = exact.U0(t, x);
          const Eigen::Vector3d h = exact.hessian_U0(t, x);
          sq += q.weight * mesh.triangle_area(tri) *
                (u0 * u0 + exact.grad_U0(t, x).squaredNorm() + h[0] * h[0] + 2 * h[1] * h[1] + h[2] * h[2]);
        }
      }
      K.U0_H2_sq += w * sq;
    }
  }
  K.value = k_constant(gamma1, gamma3, params.theta, params.k, params.alpha, params.R.lipschitz(),
                       params.Q.lipschitz(), K.R_m, K.Q_m, K.U0_H2_sq, K.u_X_sq + K.v_X_sq);
  return K;
}

void write_k_csv(std::ostream& out, const KEstimate& K) {
  const auto precision = out.precision(10);
  out << "gamma1,gamma3,R_m,Q_m,u_X_sq,v_X_sq,U0_H2_sq,K\n";
  out << K.gamma1 << ',' << K.gamma3 << ',' << K.R_m << ',' << K.Q_m << ',' << K.u_X_sq << ','
      << K.v_X_sq << ',' << K.U0_H2_sq << ',' << K.value << '\n';
  out.precision(precision);
}

bool small_mesh_condition(double h, double gamma1, double gamma3) {
  return h * h * std::max(gamma1, gamma3) < 1.0;
}

}  // namespace twoscale
