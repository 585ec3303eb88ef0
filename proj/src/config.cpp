#include "twoscale/config.hpp"

#include "twoscale/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace twoscale {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  }
  return v;
}

int to_int(const std::string& s) {
  const long v = to_long(s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("integer out of range: " + s);
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string one_of(const std::string& s, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (s == o) return s;
  }
  std::string list;
  for (const char* o : options) list += (list.empty() ? "" : " | ") + std::string(o);
  throw std::invalid_argument("'" + s + "' is not one of " + list);
}

std::string expression(const std::string& s) {
  Expr::parse(s);
  return s;
}

struct Key {
  std::string section, name, note;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Key field(std::string section, std::string name, std::string note, T RunConfig::*sub,
          double T::*member) {
  return {std::move(section), std::move(name), std::move(note),
          [=](RunConfig& c, const std::string& v) { c.*sub.*member = to_double(v); },
          [=](const RunConfig& c) { return fmt(c.*sub.*member); }};
}

template <typename T>
Key field(std::string section, std::string name, std::string note, T RunConfig::*sub,
          int T::*member) {
  return {std::move(section), std::move(name), std::move(note),
          [=](RunConfig& c, const std::string& v) { c.*sub.*member = to_int(v); },
          [=](const RunConfig& c) { return std::to_string(c.*sub.*member); }};
}

template <typename T>
Key field(std::string section, std::string name, std::string note, T RunConfig::*sub,
          bool T::*member) {
  return {std::move(section), std::move(name), std::move(note),
          [=](RunConfig& c, const std::string& v) { c.*sub.*member = to_bool(v); },
          [=](const RunConfig& c) { return std::string(c.*sub.*member ? "true" : "false"); }};
}

template <typename T, typename Check>
Key text(std::string section, std::string name, std::string note, T RunConfig::*sub,
         std::string T::*member, Check check) {
  return {std::move(section), std::move(name), std::move(note),
          [=](RunConfig& c, const std::string& v) { c.*sub.*member = check(v); },
          [=](const RunConfig& c) { return c.*sub.*member; }};
}

Key rect(std::string section, std::string name, std::string note, Rect RunConfig::Mesh::*member) {
  return {std::move(section), std::move(name), std::move(note),
          [=](RunConfig& c, const std::string& v) {
            const auto w = words(v);
            if (w.size() != 4) throw std::invalid_argument("expected 'x0 y0 x1 y1'");
            c.mesh.*member = {to_double(w[0]), to_double(w[1]), to_double(w[2]), to_double(w[3])};
          },
          [=](const RunConfig& c) {
            const Rect& r = c.mesh.*member;
            return fmt(r.x0) + " " + fmt(r.y0) + " " + fmt(r.x1) + " " + fmt(r.y1);
          }};
}

const std::vector<Key>& keys() {
  using C = RunConfig;
  using M = RunConfig::Mesh;
  using P = RunConfig::Model;
  using S = RunConfig::Solver;
  using V = RunConfig::Verify;
  using O = RunConfig::Output;
  const auto separable = [](const std::string& v) {
    parse_separable(v);
    return v;
  };
  static const std::vector<Key> table = {
      rect("mesh", "macro_domain", "macro rectangle x0 y0 x1 y1", &M::macro),
      rect("mesh", "micro_domain", "micro cell x0 y0 x1 y1", &M::micro),
      field("mesh", "macro_nx", ">= 1", &C::mesh, &M::macro_nx),
      field("mesh", "macro_ny", ">= 1", &C::mesh, &M::macro_ny),
      field("mesh", "micro_nx", ">= 1", &C::mesh, &M::micro_nx),
      field("mesh", "micro_ny", ">= 1", &C::mesh, &M::micro_ny),
      text("mesh", "gamma_r", "top_edge | left_edge | full_boundary_minus_bottom", &C::mesh,
           &M::gamma_r,
           [](const std::string& v) {
             return one_of(v, {"top_edge", "left_edge", "full_boundary_minus_bottom"});
           }),

      field("model", "theta", "> 0, porosity", &C::model, &P::theta),
      field("model", "D", "> 0 (A1)", &C::model, &P::D),
      field("model", "d1", "> 0 (A1)", &C::model, &P::d1),
      field("model", "d2", "> 0 (A1)", &C::model, &P::d2),
      field("model", "k", ">= 0 (A3), 0 switches reactions off", &C::model, &P::k),
      field("model", "alpha", "> 0 (A3)", &C::model, &P::alpha),
      text("model", "b_kind", "linear_positive_part | saturating (A2)", &C::model, &P::b_kind,
           [](const std::string& v) { return one_of(v, {"linear_positive_part", "saturating"}); }),
      field("model", "c_hat", ">= 0, Lipschitz constant of b (A2)", &C::model, &P::c_hat),
      field("model", "z_sat", "> 0, saturation level of b (A2)", &C::model, &P::z_sat),
      text("model", "R_kind", "positive_part | clipped_positive_part (A3)", &C::model, &P::R_kind,
           [](const std::string& v) { return one_of(v, {"positive_part", "clipped_positive_part"}); }),
      field("model", "R_cap", "> 0, cap of clipped R (A3)", &C::model, &P::R_cap),
      text("model", "Q_kind", "positive_part | clipped_positive_part (A3)", &C::model, &P::Q_kind,
           [](const std::string& v) { return one_of(v, {"positive_part", "clipped_positive_part"}); }),
      field("model", "Q_cap", "> 0, cap of clipped Q (A3)", &C::model, &P::Q_cap),
      text("model", "data", "inline | mms (data from exact_*, with forcing)", &C::model, &P::data,
           [](const std::string& v) { return one_of(v, {"inline", "mms"}); }),
      text("model", "U_ext", "expression in t x1 x2, >= 0 (A4)", &C::model, &P::U_ext, expression),
      text("model", "U_I", "expression in x1 x2, >= 0 (A4)", &C::model, &P::U_I, expression),
      text("model", "u_I", "expression in x1 x2 y1 y2, >= 0 (A4)", &C::model, &P::u_I, expression),
      text("model", "v_I", "expression in x1 x2 y1 y2, >= 0 (A4)", &C::model, &P::v_I, expression),
      text("model", "exact_U", "manufactured U(t, x)", &C::model, &P::exact_U, expression),
      text("model", "exact_U_ext", "manufactured Dirichlet data", &C::model, &P::exact_U_ext,
           expression),
      text("model", "exact_u", "separable 'time ; macro ; micro | ...'", &C::model, &P::exact_u,
           separable),
      text("model", "exact_v", "separable 'time ; macro ; micro | ...'", &C::model, &P::exact_v,
           separable),

      Key{"solver", "dt", "> 0 or auto (positivity step limit)",
          [](RunConfig& c, const std::string& v) {
            c.solver.dt = v == "auto" ? std::nullopt : std::optional<double>(to_double(v));
          },
          [](const RunConfig& c) { return c.solver.dt ? fmt(*c.solver.dt) : std::string("auto"); }},
      field("solver", "T", "> 0, final time", &C::solver, &S::T),
      text("solver", "scheme", "semi_implicit | picard", &C::solver, &S::scheme,
           [](const std::string& v) { return one_of(v, {"semi_implicit", "picard"}); }),
      field("solver", "cg_tol", "> 0, relative residual", &C::solver, &S::cg_tol),
      field("solver", "cg_max", ">= 1", &C::solver, &S::cg_max),
      field("solver", "picard_tol", "> 0", &C::solver, &S::picard_tol),
      field("solver", "picard_max", ">= 1", &C::solver, &S::picard_max),
      field("solver", "mass_lumping", "true | false, needed for positivity", &C::solver,
            &S::mass_lumping),
      field("solver", "bounds_tol", ">= 0, slack of the bounds monitor", &C::solver,
            &S::bounds_tol),

      field("verify", "levels", ">= 3 refinement levels", &C::verify, &V::levels),
      field("verify", "base_nx", ">= 1 cells per side on the coarsest level", &C::verify,
            &V::base_nx),
      field("verify", "dt_constant", "> 0, dt = c h^p", &C::verify, &V::dt_constant),
      field("verify", "dt_power", "> 0, p < 2 lets the time error pollute rates", &C::verify,
            &V::dt_power),
      field("verify", "T", "> 0, final time of the convergence runs", &C::verify, &V::T),
      Key{"verify", "suites", "subset of: interp eoc",
          [](RunConfig& c, const std::string& v) {
            c.verify.suites.clear();
            for (const auto& w : words(v)) c.verify.suites.push_back(one_of(w, {"interp", "eoc"}));
          },
          [](const RunConfig& c) {
            std::string out;
            for (const auto& s : c.verify.suites) out += (out.empty() ? "" : " ") + s;
            return out;
          }},
      text("verify", "interp_phi", "macro test function, zero on the boundary", &C::verify,
           &V::interp_phi, expression),
      text("verify", "interp_phi2", "separable two-scale test function", &C::verify,
           &V::interp_phi2, separable),
      Key{"verify", "trace_epsilons", "list of eps > 0",
          [](RunConfig& c, const std::string& v) {
            c.verify.trace_epsilons.clear();
            for (const auto& w : words(v)) c.verify.trace_epsilons.push_back(to_double(w));
          },
          [](const RunConfig& c) {
            std::string out;
            for (double e : c.verify.trace_epsilons) out += (out.empty() ? "" : " ") + fmt(e);
            return out;
          }},
      field("verify", "trace_samples", ">= 1 random fields", &C::verify, &V::trace_samples),
      Key{"verify", "seed", "random seed of the trace samples",
          [](RunConfig& c, const std::string& v) {
            const long s = to_long(v);
            if (s < 0 || s > std::numeric_limits<unsigned>::max()) {
              throw std::invalid_argument("seed out of range");
            }
            c.verify.seed = static_cast<unsigned>(s);
          },
          [](const RunConfig& c) { return std::to_string(c.verify.seed); }},

      text("output", "directory", "output directory", &C::output, &O::directory,
           [](const std::string& v) {
             if (v.empty()) throw std::invalid_argument("empty directory");
             return v;
           }),
      field("output", "stride", ">= 0, snapshot every n steps, 0 = series only", &C::output,
            &O::stride),
  };
  return table;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

TransferFn transfer(const RunConfig::Model& m) {
  TransferFn b;
  b.kind = transfer_kind_from_string(m.b_kind);
  b.c_hat = m.c_hat;
  b.z_sat = m.z_sat;
  return b;
}

ReactionFactorFn reaction(const std::string& kind, double cap) {
  ReactionFactorFn f;
  f.kind = reaction_kind_from_string(kind);
  f.cap = cap;
  return f;
}

ModelParams base_params(const RunConfig::Model& m) {
  ModelParams p;
  p.theta = m.theta;
  p.D = m.D;
  p.d1 = m.d1;
  p.d2 = m.d2;
  p.k = m.k;
  p.alpha = m.alpha;
  p.b = transfer(m);
  p.R = reaction(m.R_kind, m.R_cap);
  p.Q = reaction(m.Q_kind, m.Q_cap);
  return p;
}

std::vector<std::string> constraint_errors(const RunConfig& c) {
  std::vector<std::string> e;
  auto require = [&](bool ok, const std::string& message) {
    if (!ok) e.push_back(message);
  };
  for (const auto& [name, r] : {std::pair{"macro_domain", c.mesh.macro}, {"micro_domain", c.mesh.micro}}) {
    require(r.x1 > r.x0 && r.y1 > r.y0, std::string("mesh.") + name + " must have x1 > x0 and y1 > y0");
  }
  require(c.mesh.macro_nx >= 1 && c.mesh.macro_ny >= 1, "mesh.macro_nx, macro_ny must be >= 1");
  require(c.mesh.micro_nx >= 1 && c.mesh.micro_ny >= 1, "mesh.micro_nx, micro_ny must be >= 1");
  for (const auto& m : validate(base_params(c.model))) e.push_back("model." + m);

  const auto& s = c.solver;
  require(!s.dt || *s.dt > 0.0, "solver.dt must be > 0 or auto");
  require(s.T > 0.0, "solver.T must be > 0");
  require(s.cg_tol > 0.0, "solver.cg_tol must be > 0");
  require(s.cg_max >= 1, "solver.cg_max must be >= 1");
  require(s.picard_tol > 0.0, "solver.picard_tol must be > 0");
  require(s.picard_max >= 1, "solver.picard_max must be >= 1");
  require(s.bounds_tol >= 0.0, "solver.bounds_tol must be >= 0");

  const auto& v = c.verify;
  require(v.levels >= 3, "verify.levels must be >= 3 (rates need three levels)");
  require(v.base_nx >= 1, "verify.base_nx must be >= 1");
  require(v.dt_constant > 0.0, "verify.dt_constant must be > 0");
  require(v.dt_power > 0.0, "verify.dt_power must be > 0");
  require(v.T > 0.0, "verify.T must be > 0");
  require(!v.trace_epsilons.empty(), "verify.trace_epsilons must not be empty");
  for (double eps : v.trace_epsilons) require(eps > 0.0, "verify.trace_epsilons must be > 0");
  require(v.trace_samples >= 1, "verify.trace_samples must be >= 1");
  require(c.output.stride >= 0, "output.stride must be >= 0");
  return e;
}

}  // namespace

SeparableField parse_separable(const std::string& text) {
  std::vector<SeparableTerm> terms;
  for (const auto& term : split(text, '|')) {
    const auto f = split(term, ';');
    if (f.size() != 3) throw std::invalid_argument("separable term needs 'time ; macro ; micro'");
    terms.push_back({Expr::parse(f[0]), Expr::parse(f[1]), Expr::parse(f[2])});
  }
  if (terms.empty()) throw std::invalid_argument("separable field without terms");
  return SeparableField(std::move(terms));
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::vector<std::string> errors;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  for (int line_no = 1; std::getline(in, raw); ++line_no) {
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "unterminated section header");
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      static const std::set<std::string> sections{"mesh", "model", "solver", "verify", "output"};
      if (!sections.count(section)) errors.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string name = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const Key* key = find_key(section, name);
    if (!key) {
      errors.push_back(where + "unknown key '" + name + "'" +
                       (section.empty() ? " outside any section" : " in [" + section + "]"));
      continue;
    }
    if (!seen.insert({section, name}).second) {
      errors.push_back(where + "duplicate key '" + name + "'");
      continue;
    }
    try {
      key->set(c, value);
    } catch (const std::exception& ex) {
      errors.push_back(where + section + "." + name + ": " + ex.what());
    }
  }
  if (errors.empty()) errors = constraint_errors(c);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str());
}

std::string emit_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << "[" << k.section << "]\n";
      section = k.section;
    }
    out << k.name << " = " << k.get(config) << "\n";
  }
  return out.str();
}

std::string config_help() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "Config keys (default; constraint):\n";
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      out << "  [" << k.section << "]\n";
      section = k.section;
    }
    out << "    " << k.name << " = " << k.get(defaults) << "    # " << k.note << "\n";
  }
  return out.str();
}

ExactSolution exact_solution(const RunConfig& config) {
  const auto& m = config.model;
  return ExactSolution(Expr::parse(m.exact_U), Expr::parse(m.exact_U_ext),
                       parse_separable(m.exact_u), parse_separable(m.exact_v));
}

ModelParams model_params(const RunConfig& config) {
  ModelParams p = base_params(config.model);
  if (config.model.data == "mms") return exact_solution(config).data(p);
  const Expr U_ext = Expr::parse(config.model.U_ext), U_I = Expr::parse(config.model.U_I);
  const Expr u_I = Expr::parse(config.model.u_I), v_I = Expr::parse(config.model.v_I);
  p.U_ext = [U_ext](double t, const Vec2& x) { return U_ext(t, x.x(), x.y()); };
  p.U_I = [U_I](const Vec2& x) { return U_I(0.0, x.x(), x.y()); };
  p.u_I = [u_I](const Vec2& x, const Vec2& y) { return u_I(0.0, x.x(), x.y(), y.x(), y.y()); };
  p.v_I = [v_I](const Vec2& x, const Vec2& y) { return v_I(0.0, x.x(), x.y(), y.x(), y.y()); };
  return p;
}

std::shared_ptr<const CoupledOperators> coupled_operators(const RunConfig& config) {
  const auto& m = config.mesh;
  const Vec2 a(m.macro.x0, m.macro.y0), b(m.macro.x1, m.macro.y1);
  const Vec2 c(m.micro.x0, m.micro.y0), d(m.micro.x1, m.micro.y1);
  auto macro = std::make_shared<const P1Space>(
      std::make_shared<const Mesh2D>(make_rect_mesh(a, b, m.macro_nx, m.macro_ny)));
  auto micro = std::make_shared<const P1Space>(std::make_shared<const Mesh2D>(
      tag_boundary(make_rect_mesh(c, d, m.micro_nx, m.micro_ny), gamma_r_preset(m.gamma_r, c, d))));
  return std::make_shared<const CoupledOperators>(make_coupled_operators(macro, micro));
}

LinfBounds data_bounds(const RunConfig& config, const ModelParams& params,
                       const CoupledOperators& ops) {
  std::vector<double> times;
  for (int i = 0; i <= 20; ++i) times.push_back(config.solver.T * i / 20.0);
  return linf_bounds(params, ops.macro->mesh(), ops.micro->mesh(), times);
}

SolverConfig solver_config(const RunConfig& config, const ModelParams& params,
                           const CoupledOperators& ops) {
  const auto& s = config.solver;
  SolverConfig cfg;
  cfg.T = s.T;
  cfg.dt = s.dt ? *s.dt : std::min(max_positive_dt(params, ops, data_bounds(config, params, ops)), s.T);
  cfg.scheme = scheme_from_string(s.scheme);
  cfg.cg = {s.cg_tol, s.cg_max};
  cfg.picard_tol = s.picard_tol;
  cfg.picard_max = s.picard_max;
  cfg.mass_lumping = s.mass_lumping;
  return cfg;
}

}  // namespace twoscale
