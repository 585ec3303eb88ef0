#pragma once

#include "twoscale/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace twoscale {

/// Transfer function b on Gamma_R. b(z) = 0 for z <= 0 and b is Lipschitz
/// with constant c_hat. c_hat = 0 switches the exchange off.
struct TransferFn {
  enum class Kind { LinearPositivePart, Saturating };

  Kind kind = Kind::LinearPositivePart;
  double c_hat = 1.0;
  double z_sat = 1.0;  // saturating only

  static TransferFn linear_positive_part(double c_hat);
  /// c_hat * min(max(z, 0), z_sat)
  static TransferFn saturating(double c_hat, double z_sat);

  double operator()(double z) const;
  double lipschitz() const { return c_hat; }
};

/// Factor R or Q of the reaction rate eta(r, s) = R(r) Q(s).
struct ReactionFactorFn {
  enum class Kind { PositivePart, ClippedPositivePart };

  Kind kind = Kind::PositivePart;
  double cap = 1.0;  // clipped only

  static ReactionFactorFn positive_part();
  static ReactionFactorFn clipped_positive_part(double cap);

  double operator()(double r) const;
  double lipschitz() const { return 1.0; }
  /// max over [0, m]
  double max_on(double m) const;
};

double eval_b(const TransferFn& b, double z);
double eval_eta(const ReactionFactorFn& R, const ReactionFactorFn& Q, double r, double s);

std::string to_string(TransferFn::Kind kind);
std::string to_string(ReactionFactorFn::Kind kind);
TransferFn::Kind transfer_kind_from_string(const std::string& name);
ReactionFactorFn::Kind reaction_kind_from_string(const std::string& name);

using MacroTimeData = std::function<double(double t, const Vec2& x)>;
using MacroData = std::function<double(const Vec2& x)>;
using TwoScaleData = std::function<double(const Vec2& x, const Vec2& y)>;

struct ModelParams {
  double theta = 1.0;
  double D = 1.0;
  double d1 = 1.0;
  double d2 = 1.0;
  double k = 1.0;
  double alpha = 1.0;
  TransferFn b;
  ReactionFactorFn R;
  ReactionFactorFn Q;
  MacroTimeData U_ext = [](double, const Vec2&) { return 0.0; };
  MacroData U_I = [](const Vec2&) { return 0.0; };
  TwoScaleData u_I = [](const Vec2&, const Vec2&) { return 0.0; };
  TwoScaleData v_I = [](const Vec2&, const Vec2&) { return 0.0; };
};

/// Every violated constraint, each naming the assumption it comes from.
/// k = 0 and c_hat = 0 are accepted as decoupling switches.
std::vector<std::string> validate(const ModelParams& params);
/// Throws ValidationError when validate() reports anything.
void check_params(const ModelParams& params);

struct LinfBounds {
  double m1 = 0.0;  // U
  double m2 = 0.0;  // u
  double m3 = 0.0;  // v
};

/// m1 = 2 sup U_ext + sup U_I, m2 = max(sup u_I, m1), m3 = sup v_I.
LinfBounds linf_bounds(double sup_U_ext, double sup_U_I, double sup_u_I, double sup_v_I);
/// Suprema of the data sampled at the vertices of both meshes and at the
/// given times.
LinfBounds linf_bounds(const ModelParams& params, const Mesh2D& macro, const Mesh2D& micro,
                       const std::vector<double>& times);

struct ReactionMax {
  double R_m = 0.0;
  double Q_m = 0.0;
};

ReactionMax reaction_max_factors(const ReactionFactorFn& R, const ReactionFactorFn& Q, double m2,
                                 double m3);

}  // namespace twoscale
