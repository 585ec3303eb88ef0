#pragma once

#include "twoscale/coupling.hpp"
#include "twoscale/model.hpp"
#include "twoscale/solver.hpp"
#include "twoscale/verify.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace twoscale {

/// Syntax or constraint errors of a configuration file, each with its line
/// number when it has one.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  bool operator==(const Rect&) const = default;
};

/// Run configuration: "key = value" lines under [mesh], [model], [solver],
/// [verify] and [output] headers, '#' starts a comment. Expressions use the
/// variables t, x1, x2, y1, y2. A separable field is written as terms
/// separated by '|', each term "time ; macro ; micro".
struct RunConfig {
  struct Mesh {
    Rect macro;
    Rect micro;
    int macro_nx = 8, macro_ny = 8;
    int micro_nx = 8, micro_ny = 8;
    std::string gamma_r = "top_edge";
    bool operator==(const Mesh&) const = default;
  } mesh;

  struct Model {
    double theta = 1.0, D = 1.0, d1 = 1.0, d2 = 1.0, k = 1.0, alpha = 1.0;
    std::string b_kind = "saturating";
    double c_hat = 1.0, z_sat = 0.5;
    std::string R_kind = "positive_part", Q_kind = "positive_part";
    double R_cap = 1.0, Q_cap = 1.0;
    std::string data = "inline";  // inline | mms
    // inline data
    std::string U_ext = "1", U_I = "0.5", u_I = "0.25*(1 + y1)", v_I = "1";
    // manufactured solution (data = mms)
    std::string exact_U = "exp(-t)*(1 + sin(pi*x1)*sin(pi*x2))";
    std::string exact_U_ext = "exp(-t)";
    std::string exact_u =
        "exp(-t) ; 1 + x1*x2 ; 0.75 + 0.5*cos(pi*y1)*y2^2 | t ; sin(pi*x1) ; y1^2";
    std::string exact_v = "exp(-t) ; 1 + 0.5*sin(pi*x1)*x2 ; 1 + y1*y2";
    bool operator==(const Model&) const = default;
  } model;

  struct Solver {
    std::optional<double> dt;  // empty: "auto", the positivity step limit
    double T = 0.1;
    std::string scheme = "semi_implicit";
    double cg_tol = 1e-12;
    int cg_max = 20000;
    double picard_tol = 1e-10;
    int picard_max = 50;
    bool mass_lumping = true;
    double bounds_tol = 1e-10;
    bool operator==(const Solver&) const = default;
  } solver;

  struct Verify {
    int levels = 4;
    int base_nx = 4;
    double dt_constant = 0.1;
    double dt_power = 2.0;
    double T = 0.025;
    std::vector<std::string> suites{"interp", "eoc"};
    std::string interp_phi = "sin(pi*x1)*sin(pi*x2)";
    std::string interp_phi2 = "1 ; sin(pi*x1) ; cos(pi*y1)";
    std::vector<double> trace_epsilons{1.0, 0.1, 0.01};
    int trace_samples = 50;
    unsigned seed = 1;
    bool operator==(const Verify&) const = default;
  } verify;

  struct Output {
    std::string directory = "out";
    int stride = 0;  // 0: time series only
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates; throws ConfigError listing every problem found.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical text; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);
/// Every key with its default and the constraint it is checked against.
std::string config_help();

SeparableField parse_separable(const std::string& text);

ModelParams model_params(const RunConfig& config);
ExactSolution exact_solution(const RunConfig& config);
std::shared_ptr<const CoupledOperators> coupled_operators(const RunConfig& config);
/// Solver settings; dt is resolved against max_positive_dt when "auto".
SolverConfig solver_config(const RunConfig& config, const ModelParams& params,
                           const CoupledOperators& ops);
LinfBounds data_bounds(const RunConfig& config, const ModelParams& params,
                       const CoupledOperators& ops);

}  // namespace twoscale
