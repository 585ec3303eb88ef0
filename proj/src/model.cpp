#include "twoscale/model.hpp"

#include "twoscale/errors.hpp"

#include <algorithm>
#include <cmath>

namespace twoscale {

TransferFn TransferFn::linear_positive_part(double c_hat) {
  return {Kind::LinearPositivePart, c_hat, 1.0};
}

TransferFn TransferFn::saturating(double c_hat, double z_sat) {
  return {Kind::Saturating, c_hat, z_sat};
}

double TransferFn::operator()(double z) const {
  if (!(z > 0.0)) return 0.0;
  if (kind == Kind::Saturating) return c_hat * std::min(z, z_sat);
  return c_hat * z;
}

ReactionFactorFn ReactionFactorFn::positive_part() { return {Kind::PositivePart, 1.0}; }

ReactionFactorFn ReactionFactorFn::clipped_positive_part(double cap) {
  return {Kind::ClippedPositivePart, cap};
}

double ReactionFactorFn::operator()(double r) const {
  if (!(r > 0.0)) return 0.0;
  return kind == Kind::ClippedPositivePart ? std::min(r, cap) : r;
}

double ReactionFactorFn::max_on(double m) const { return (*this)(m); }

double eval_b(const TransferFn& b, double z) { return b(z); }

double eval_eta(const ReactionFactorFn& R, const ReactionFactorFn& Q, double r, double s) {
  return R(r) * Q(s);
}

std::string to_string(TransferFn::Kind kind) {
  return kind == TransferFn::Kind::Saturating ? "saturating" : "linear_positive_part";
}

std::string to_string(ReactionFactorFn::Kind kind) {
  return kind == ReactionFactorFn::Kind::ClippedPositivePart ? "clipped_positive_part"
                                                             : "positive_part";
}

TransferFn::Kind transfer_kind_from_string(const std::string& name) {
  if (name == "linear_positive_part") return TransferFn::Kind::LinearPositivePart;
  if (name == "saturating") return TransferFn::Kind::Saturating;
  throw std::invalid_argument("unknown transfer function kind '" + name + "'");
}

ReactionFactorFn::Kind reaction_kind_from_string(const std::string& name) {
  if (name == "positive_part") return ReactionFactorFn::Kind::PositivePart;
  if (name == "clipped_positive_part") return ReactionFactorFn::Kind::ClippedPositivePart;
  throw std::invalid_argument("unknown reaction factor kind '" + name + "'");
}

std::vector<std::string> validate(const ModelParams& p) {
  std::vector<std::string> errors;
  auto positive = [&](double value, const char* name, const char* clause) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      errors.push_back(std::string(name) + " = " + std::to_string(value) + " must be > 0 " + clause);
    }
  };
  positive(p.theta, "theta", "(porosity)");
  positive(p.D, "D", "(A1: D > 0, d1 > 0, d2 > 0)");
  positive(p.d1, "d1", "(A1: D > 0, d1 > 0, d2 > 0)");
  positive(p.d2, "d2", "(A1: D > 0, d1 > 0, d2 > 0)");
  positive(p.alpha, "alpha", "(A3: alpha > 0)");
  if (!(p.k >= 0.0) || !std::isfinite(p.k)) {
    errors.push_back("k = " + std::to_string(p.k) + " must be >= 0 (A3: reaction constant)");
  }
  if (!(p.b.c_hat >= 0.0) || !std::isfinite(p.b.c_hat)) {
    errors.push_back("b.c_hat = " + std::to_string(p.b.c_hat) +
                     " must be >= 0 (A2: b globally Lipschitz)");
  }
  if (p.b.kind == TransferFn::Kind::Saturating && !(p.b.z_sat > 0.0)) {
    errors.push_back("b.z_sat = " + std::to_string(p.b.z_sat) + " must be > 0 (A2)");
  }
  auto factor = [&](const ReactionFactorFn& f, const char* name) {
    if (f.kind == ReactionFactorFn::Kind::ClippedPositivePart && !(f.cap > 0.0)) {
      errors.push_back(std::string(name) + ".cap = " + std::to_string(f.cap) +
                       " must be > 0 (A3: R(r) > 0 for r > 0)");
    }
  };
  factor(p.R, "R");
  factor(p.Q, "Q");
  return errors;
}

void check_params(const ModelParams& params) {
  auto errors = validate(params);
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

LinfBounds linf_bounds(double sup_U_ext, double sup_U_I, double sup_u_I, double sup_v_I) {
  if (sup_U_ext < 0 || sup_U_I < 0 || sup_u_I < 0 || sup_v_I < 0) {
    throw PreconditionError("linf_bounds: suprema must be nonnegative");
  }
  LinfBounds out;
  out.m1 = 2.0 * sup_U_ext + sup_U_I;
  out.m2 = std::max(sup_u_I, out.m1);
  out.m3 = sup_v_I;
  return out;
}

LinfBounds linf_bounds(const ModelParams& params, const Mesh2D& macro, const Mesh2D& micro,
                       const std::vector<double>& times) {
  double sup_ext = 0.0, sup_UI = 0.0, sup_u = 0.0, sup_v = 0.0;
  for (const auto& x : macro.vertices()) {
    for (double t : times) sup_ext = std::max(sup_ext, std::abs(params.U_ext(t, x)));
    sup_UI = std::max(sup_UI, std::abs(params.U_I(x)));
    for (const auto& y : micro.vertices()) {
      sup_u = std::max(sup_u, std::abs(params.u_I(x, y)));
      sup_v = std::max(sup_v, std::abs(params.v_I(x, y)));
    }
  }
  return linf_bounds(sup_ext, sup_UI, sup_u, sup_v);
}

ReactionMax reaction_max_factors(const ReactionFactorFn& R, const ReactionFactorFn& Q, double m2,
                                 double m3) {
  if (m2 < 0 || m3 < 0) throw PreconditionError("reaction_max_factors: bounds must be nonnegative");
  return {R.max_on(m2), Q.max_on(m3)};
}

}  // namespace twoscale
