#include "twoscale/parallel.hpp"
#include "twoscale/quadrature.hpp"
#include "twoscale/verify.hpp"

#include <algorithm>
#include <cmath>

namespace twoscale {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Gauss points on Gamma_R edges, each edge cut into `pieces` segments.
struct EdgePoints {
  std::vector<Vec2> points;
  std::vector<double> weights;  // include the segment length
  Triplets hats;                // (micro vertex, point, hat value)
};

EdgePoints gamma_points(const CoupledOperators& ops, int min_segments, int points_per_segment) {
  EdgePoints out;
  const auto& v = ops.micro->mesh().vertices();
  const int n_edges = static_cast<int>(ops.gamma_edges.size());
  const int pieces = std::max(1, (min_segments + n_edges - 1) / n_edges);
  const auto rule = line_rule(points_per_segment);
  for (int e = 0; e < n_edges; ++e) {
    const auto [p, q] = ops.gamma_edges[e];
    const double seg = ops.gamma_lengths[e] / pieces;
    for (int s = 0; s < pieces; ++s) {
      for (const auto& g : rule) {
        const double lambda = (s + g.s) / pieces;  // position along p -> q
        const int id = static_cast<int>(out.points.size());
        out.points.push_back((1.0 - lambda) * v[p] + lambda * v[q]);
        out.weights.push_back(g.weight * seg);
        out.hats.emplace_back(p, id, 1.0 - lambda);
        out.hats.emplace_back(q, id, lambda);
      }
    }
  }
  return out;
}

// Quadrature points of a triangle rule with the scatter matrices
// P(i, q) = w_q phi_i(x_q) and G_d(i, q) = w_q d_d phi_i.
struct VolumePoints {
  std::vector<Vec2> points;
  SparseMatrix P, G1, G2;
};

VolumePoints volume_points(const P1Space& space, int degree) {
  VolumePoints out;
  const Mesh2D& mesh = space.mesh();
  const auto rule = triangle_rule(degree);
  Triplets p, g1, g2;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& v = mesh.vertices();
    const auto grads = hat_gradients(v[tri[0]], v[tri[1]], v[tri[2]]);
    const double area = mesh.triangle_area(t);
    for (const auto& q : rule) {
      const int id = static_cast<int>(out.points.size());
      out.points.push_back(q.bary[0] * v[tri[0]] + q.bary[1] * v[tri[1]] + q.bary[2] * v[tri[2]]);
      const double w = q.weight * area;
      for (int a = 0; a < 3; ++a) {
        p.emplace_back(tri[a], id, w * q.bary[a]);
        g1.emplace_back(tri[a], id, w * grads[a].x());
        g2.emplace_back(tri[a], id, w * grads[a].y());
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(out.points.size());
  for (auto [m, trips] : {std::pair{&out.P, &p}, {&out.G1, &g1}, {&out.G2, &g2}}) {
    m->resize(space.n_dof(), n);
    m->setFromTriplets(trips->begin(), trips->end());
  }
  return out;
}

struct FieldTables {
  Eigen::MatrixXd nodal;     // Nx x m: macro factors at macro vertices
  Eigen::MatrixXd at_macro;  // nqx x m: macro factors at macro quadrature points
  Eigen::MatrixXd ly, gy;    // m x Ny: micro loads of the factor and its gradient
  Eigen::MatrixXd at_micro;  // m x nqy
  Eigen::MatrixXd at_gamma;  // m x ng
};

FieldTables field_tables(const SeparableField& f, const CoupledOperators& ops,
                         const VolumePoints& xq, const VolumePoints& yq, const EdgePoints& gp) {
  const auto m = static_cast<Eigen::Index>(f.size());
  const auto& xv = ops.macro->mesh().vertices();
  FieldTables t;
  t.nodal.resize(xv.size(), m);
  t.at_macro.resize(xq.points.size(), m);
  t.ly.resize(m, ops.micro->n_dof());
  t.gy.resize(m, ops.micro->n_dof());
  t.at_micro.resize(m, yq.points.size());
  t.at_gamma.resize(m, gp.points.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < xv.size(); ++j) t.nodal(j, i) = f.macro_factor(i, xv[j]);
    for (std::size_t q = 0; q < xq.points.size(); ++q) t.at_macro(q, i) = f.macro_factor(i, xq.points[q]);
    Eigen::VectorXd values(yq.points.size()), g1(yq.points.size()), g2(yq.points.size());
    for (std::size_t q = 0; q < yq.points.size(); ++q) {
      values[q] = f.micro_factor(i, yq.points[q]);
      const Vec2 g = f.micro_gradient(i, yq.points[q]);
      g1[q] = g.x();
      g2[q] = g.y();
    }
    t.at_micro.row(i) = values.transpose();
    t.ly.row(i) = (yq.P * values).transpose();
    t.gy.row(i) = (yq.G1 * g1 + yq.G2 * g2).transpose();
    for (std::size_t g = 0; g < gp.points.size(); ++g) t.at_gamma(i, g) = f.micro_factor(i, gp.points[g]);
  }
  return t;
}

}  // namespace

struct MmsForcing::Tables {
  VolumePoints xq, yq;
  EdgePoints gamma;
  SparseMatrix gamma_hats;  // Ny x ng
  FieldTables u, v;
};

MmsForcing::MmsForcing(ExactSolution exact, ModelParams params,
                       std::shared_ptr<const CoupledOperators> ops)
    : exact_(std::move(exact)), params_(std::move(params)), ops_(std::move(ops)) {
  tables_ = std::make_unique<Tables>();
  Tables& t = *tables_;
  t.xq = volume_points(*ops_->macro, 4);
  t.yq = volume_points(*ops_->micro, 4);
  t.gamma = gamma_points(*ops_, 64, 5);
  t.gamma_hats.resize(ops_->micro->n_dof(), t.gamma.points.size());
  t.gamma_hats.setFromTriplets(t.gamma.hats.begin(), t.gamma.hats.end());
  t.u = field_tables(exact_.u(), *ops_, t.xq, t.yq, t.gamma);
  t.v = field_tables(exact_.v(), *ops_, t.xq, t.yq, t.gamma);
}

MmsForcing::~MmsForcing() = default;

ForcingLoads MmsForcing::loads(double t_lin, double t_nl) const {
  const Tables& tb = *tables_;
  const ModelParams& p = params_;
  const auto& xv = ops_->macro->mesh().vertices();
  const auto nx = static_cast<Eigen::Index>(xv.size());
  const Eigen::Index nqx = static_cast<Eigen::Index>(tb.xq.points.size());
  const Eigen::Map<const Eigen::VectorXd> gw(tb.gamma.weights.data(), tb.gamma.weights.size());

  // Macro: theta dU/dt xi + D grad U . grad xi + int_Gamma_R b(U - u) xi.
  Eigen::VectorXd vol(nqx), g1(nqx), g2(nqx), Uq(nqx);
  for (Eigen::Index q = 0; q < nqx; ++q) {
    const Vec2& x = tb.xq.points[q];
    vol[q] = p.theta * exact_.dU_dt(t_lin, x);
    const Vec2 g = exact_.grad_U(t_lin, x);
    g1[q] = p.D * g.x();
    g2[q] = p.D * g.y();
    Uq[q] = exact_.U(t_nl, x);
  }
  const Eigen::VectorXd tau_u = exact_.u().time_factors(t_nl);
  const Eigen::VectorXd tau_v = exact_.v().time_factors(t_nl);
  parallel_for(nqx, [&](std::size_t begin, std::size_t end) {
    const auto rows = static_cast<Eigen::Index>(end - begin);
    const Eigen::MatrixXd ug = tb.u.at_macro.middleRows(begin, rows) * tau_u.asDiagonal() * tb.u.at_gamma;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index q = begin + r;
      double sum = 0.0;
      for (Eigen::Index g = 0; g < ug.cols(); ++g) sum += gw[g] * p.b(Uq[q] - ug(r, g));
      vol[q] += sum;
    }
  });
  ForcingLoads out;
  out.macro = tb.xq.P * vol + tb.xq.G1 * g1 + tb.xq.G2 * g2;

  // Micro, row j at x = x_j: du/dt eta + d1 grad u . grad eta (linear part).
  const Eigen::VectorXd dtau_u = exact_.u().time_derivative_factors(t_lin);
  const Eigen::VectorXd dtau_v = exact_.v().time_derivative_factors(t_lin);
  const Eigen::VectorXd lin_tau_u = exact_.u().time_factors(t_lin);
  const Eigen::VectorXd lin_tau_v = exact_.v().time_factors(t_lin);
  out.u = tb.u.nodal * (dtau_u.asDiagonal() * tb.u.ly + (p.d1 * lin_tau_u).asDiagonal() * tb.u.gy);
  out.v = tb.v.nodal * (dtau_v.asDiagonal() * tb.v.ly + (p.d2 * lin_tau_v).asDiagonal() * tb.v.gy);

  Eigen::VectorXd Un(nx);
  for (Eigen::Index j = 0; j < nx; ++j) Un[j] = exact_.U(t_nl, xv[j]);
  const SparseMatrix yP_t = tb.yq.P.transpose();
  const SparseMatrix gh_t = tb.gamma_hats.transpose();
  parallel_for(nx, [&](std::size_t begin, std::size_t end) {
    constexpr Eigen::Index block = 32;
    for (auto b0 = static_cast<Eigen::Index>(begin); b0 < static_cast<Eigen::Index>(end); b0 += block) {
      const Eigen::Index rows = std::min<Eigen::Index>(block, end - b0);
      // + k eta(u, v) eta_k, and alpha k for v
      Eigen::MatrixXd uq = tb.u.nodal.middleRows(b0, rows) * tau_u.asDiagonal() * tb.u.at_micro;
      const Eigen::MatrixXd vq = tb.v.nodal.middleRows(b0, rows) * tau_v.asDiagonal() * tb.v.at_micro;
      for (Eigen::Index i = 0; i < uq.size(); ++i) uq.data()[i] = eval_eta(p.R, p.Q, uq.data()[i], vq.data()[i]);
      const Eigen::MatrixXd eta_load = uq * yP_t;
      out.u.middleRows(b0, rows) += p.k * eta_load;
      out.v.middleRows(b0, rows) += p.alpha * p.k * eta_load;
      // - int_Gamma_R b(U - u) eta_k
      Eigen::MatrixXd ug = tb.u.nodal.middleRows(b0, rows) * tau_u.asDiagonal() * tb.u.at_gamma;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index g = 0; g < ug.cols(); ++g) ug(r, g) = gw[g] * p.b(Un[b0 + r] - ug(r, g));
      }
      out.u.middleRows(b0, rows) -= ug * gh_t;
    }
  });
  return out;
}

PointForcing mms_forcing(const ExactSolution& exact, const ModelParams& params, const P1Space& micro,
                         double t, const Vec2& x, const Vec2& y, int gamma_points) {
  const Mesh2D& mesh = micro.mesh();
  const auto rule = line_rule(gamma_points);
  const double Ux = exact.U(t, x);
  double exchange = 0.0;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.tag != BoundaryTag::GammaR) continue;
    const Vec2& a = mesh.vertices()[e.vertices[0]];
    const Vec2& b = mesh.vertices()[e.vertices[1]];
    const double length = (b - a).norm();
    for (const auto& g : rule) {
      exchange += g.weight * length * params.b(Ux - exact.u().value(t, x, a + g.s * (b - a)));
    }
  }
  const double u = exact.u().value(t, x, y), v = exact.v().value(t, x, y);
  const double eta = eval_eta(params.R, params.Q, u, v);
  PointForcing out;
  out.f_U = params.theta * exact.dU_dt(t, x) - params.D * exact.laplacian_U(t, x) + exchange;
  out.f_u = exact.u().time_derivative(t, x, y) - params.d1 * exact.u().laplacian_y(t, x, y) + params.k * eta;
  out.f_v = exact.v().time_derivative(t, x, y) - params.d2 * exact.v().laplacian_y(t, x, y) +
            params.alpha * params.k * eta;
  return out;
}

}  // namespace twoscale
