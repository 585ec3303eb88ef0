#include "twoscale/cli.hpp"

#include "twoscale/config.hpp"
#include "twoscale/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace twoscale {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  int levels = 0;  // 0: from the config
  unsigned threads = 0;
};

std::ofstream open_output(const RunConfig& c, const std::string& name) {
  std::ofstream file(fs::path(c.output.directory) / name);
  if (!file) throw std::runtime_error("cannot write " + (fs::path(c.output.directory) / name).string());
  file << std::setprecision(12);
  return file;
}

RunConfig prepare(const Options& o) {
  RunConfig c = load_config(o.config);
  if (o.levels > 0) {
    c.verify.levels = o.levels;
    c = parse_config(emit_config(c));  // re-validate the override
  }
  set_num_threads(o.threads);
  fs::create_directories(c.output.directory);
  open_output(c, "config.cfg") << emit_config(c);
  return c;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = prepare(o);
  const ModelParams params = model_params(c);
  const auto ops = coupled_operators(c);
  SolverConfig cfg = solver_config(c, params, *ops);
  std::vector<std::string> warnings;
  const State initial = initial_state(params, *ops, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  std::vector<Observer> observers{snapshot_writer(c.output.directory, c.output.stride, ops)};
  std::shared_ptr<ErrorAccumulator> errors;
  if (c.model.data == "mms") {
    const ExactSolution exact = exact_solution(c);
    cfg.forcing = std::make_shared<MmsForcing>(exact, params, ops);
    errors = std::make_shared<ErrorAccumulator>(exact, ops, cfg.step_size());
    observers.push_back(errors->observer());
  }
  const RunSummary s = run(params, ops, cfg, observers, initial);
  out << "run: " << s.steps << " steps of dt=" << num(cfg.step_size()) << " to t="
      << num(s.final_state.t) << ", total_v=" << num(total_v_mass(s.final_state, *ops))
      << ", max CG iterations " << s.max_cg_iterations;
  if (errors) {
    const auto e = errors->result();
    out << ", e_U_H1=" << num(e.U_H1) << ", e_u=" << num(e.u_L2H1y) << ", e_v=" << num(e.v_L2H1y);
  }
  out << "\n";
  return kExitOk;
}

InterpolationReport interpolation(const RunConfig& c) {
  return interpolation_rate_test(Expr::parse(c.verify.interp_phi),
                                 parse_separable(c.verify.interp_phi2), c.verify.base_nx,
                                 c.verify.levels);
}

int cmd_interp(const Options& o, std::ostream& out, std::ostream&) {
  const RunConfig c = prepare(o);
  const InterpolationReport r = interpolation(c);
  auto file = open_output(c, "rates.csv");
  r.write_csv(file);
  out << "interp-test: rates i1=" << num(r.rate[0]) << " i2=" << num(r.rate[1])
      << " i3=" << num(r.rate[2]) << " i4=" << num(r.rate[3]) << "\n";
  return kExitOk;
}

int cmd_eoc(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = prepare(o);
  const ExactSolution exact = exact_solution(c);
  RunConfig mms = c;
  mms.model.data = "mms";
  const ModelParams params = model_params(mms);
  const auto has = [&](const char* s) {
    return std::find(c.verify.suites.begin(), c.verify.suites.end(), s) != c.verify.suites.end();
  };

  EocOptions options;
  options.base_nx = c.verify.base_nx;
  options.levels = c.verify.levels;
  options.dt_constant = c.verify.dt_constant;
  options.dt_power = c.verify.dt_power;
  options.T = c.verify.T;
  options.gamma_r = c.mesh.gamma_r;
  options.solver.scheme = scheme_from_string(c.solver.scheme);
  options.solver.cg = {c.solver.cg_tol, c.solver.cg_max};
  options.solver.picard_tol = c.solver.picard_tol;
  options.solver.picard_max = c.solver.picard_max;
  options.solver.mass_lumping = c.solver.mass_lumping;
  if (!has("eoc")) {
    err << "eoc: suite 'eoc' not selected in [verify] suites\n";
    return kExitInvalid;
  }
  const EocTable table = run_eoc(exact, params, options);
  for (const auto& w : table.warnings) err << "warning: " << w << "\n";
  {
    auto file = open_output(c, "eoc.csv");
    table.write_csv(file);
  }
  const std::pair<const char*, double SpaceTimeErrors::*> norms[] = {
      {"U_H1", &SpaceTimeErrors::U_H1},   {"u_L2H1y", &SpaceTimeErrors::u_L2H1y},
      {"v_L2H1y", &SpaceTimeErrors::v_L2H1y}, {"U_L2", &SpaceTimeErrors::U_L2},
      {"u_L2", &SpaceTimeErrors::u_L2},   {"v_L2", &SpaceTimeErrors::v_L2}};
  double worst_energy = 1e300, worst_l2 = 1e300;
  for (int i = 0; i < 6; ++i) {
    auto file = open_output(c, std::string("h_") + norms[i].first + ".dat");
    table.write_h_error(file, norms[i].second);
    for (double r : table.rates(norms[i].second)) {
      (i < 3 ? worst_energy : worst_l2) = std::min(i < 3 ? worst_energy : worst_l2, r);
    }
  }
  out << "eoc: " << table.rows.size() << " levels, worst observed rate " << num(worst_energy)
      << " (energy norms), " << num(worst_l2) << " (L2 norms)";

  if (has("interp")) {
    const InterpolationReport interp = interpolation(c);
    {
      auto file = open_output(c, "rates.csv");
      interp.write_csv(file);
    }
    const ModelParams data = params;
    const auto coarse = unit_square_ops(c.verify.base_nx, c.verify.base_nx, c.mesh.gamma_r);
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(c.verify.T * i / 20.0);
    const LinfBounds b = linf_bounds(data, coarse->macro->mesh(), coarse->micro->mesh(), times);
    const auto fine = unit_square_ops(c.verify.base_nx << (c.verify.levels - 1),
                                      c.verify.base_nx << (c.verify.levels - 1), c.mesh.gamma_r);
    const KEstimate K = estimate_K(exact, params, c.verify.T, interp.gamma[0], interp.gamma[2],
                                   reaction_max_factors(params.R, params.Q, b.m2, b.m3),
                                   *fine->macro, *fine->micro);
    {
      auto file = open_output(c, "kconst.csv");
      write_k_csv(file, K);
    }
    double ratio = 0.0;
    for (const auto& row : table.rows) {
      ratio = std::max(ratio, row.err.combined_squared() / (K.value * row.h * row.h));
      if (!small_mesh_condition(row.h, K.gamma1, K.gamma3)) {
        err << "warning: h^2 max(gamma1, gamma3) >= 1 at nx=" << row.nx << "\n";
      }
    }
    out << ", K=" << num(K.value) << ", max err^2/(K h^2)=" << num(ratio);
  }
  out << "\n";
  return kExitOk;
}

int cmd_bounds(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = prepare(o);
  const ModelParams params = model_params(c);
  const auto ops = coupled_operators(c);
  SolverConfig cfg = solver_config(c, params, *ops);
  if (c.model.data == "mms") {
    cfg.forcing = std::make_shared<MmsForcing>(exact_solution(c), params, ops);
  }
  const LinfBounds bounds = data_bounds(c, params, *ops);
  std::vector<std::string> warnings;
  const State initial = initial_state(params, *ops, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  BoundsMonitor monitor(ops, bounds, c.solver.bounds_tol);
  const RunSummary s = run(params, ops, cfg, {monitor.observer()}, initial);
  auto file = open_output(c, "bounds.csv");
  monitor.write_csv(file);
  out << "bounds-check: " << monitor.violations() << " violations over " << s.steps
      << " steps (m1=" << num(bounds.m1) << ", m2=" << num(bounds.m2) << ", m3=" << num(bounds.m3)
      << ", dt=" << num(cfg.step_size()) << ")\n";
  return kExitOk;
}

int cmd_trace(const Options& o, std::ostream& out, std::ostream&) {
  const RunConfig c = prepare(o);
  const auto ops = coupled_operators(c);
  const auto samples = random_smooth_fields(*ops, c.verify.trace_samples, c.verify.seed);
  const auto rows = trace_inequality_check(samples, c.verify.trace_epsilons, *ops);
  auto file = open_output(c, "trace.csv");
  file << "epsilon,constant\n";
  out << "trace-check: " << samples.size() << " samples";
  for (const auto& r : rows) {
    file << r.epsilon << ',' << r.constant << '\n';
    out << ", eps=" << num(r.epsilon) << " C=" << num(r.constant);
  }
  out << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-scale finite element solver and verification suites"};
  app.footer("\n" + config_help() +
             "\nExit codes: 0 success, 1 invalid or missing configuration, 2 solver failure.");
  app.require_subcommand(1);
  Options o;
  std::function<int(const Options&, std::ostream&, std::ostream&)> action;
  const auto add = [&](const char* name, const char* description, auto fn, bool levels) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", o.config, "configuration file")->required();
    sub->add_option("--threads", o.threads, "worker threads, 0 = hardware default");
    if (levels) sub->add_option("--levels", o.levels, "refinement levels, overrides [verify] levels");
    sub->callback([&action, fn] { action = fn; });
  };
  add("run", "time integration with snapshots and series.csv", cmd_run, false);
  add("eoc", "convergence table eoc.csv against the manufactured solution", cmd_eoc, true);
  add("interp-test", "projection error rates rates.csv", cmd_interp, true);
  add("bounds-check", "run with the bounds monitor, bounds.csv", cmd_bounds, false);
  add("trace-check", "trace inequality constants for random fields, trace.csv", cmd_trace, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  try {
    return action(o, out, err);
  } catch (const ValidationError& e) {
    for (const auto& m : e.messages()) err << "error: " << m << "\n";
    return kExitInvalid;
  } catch (const SolverError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace twoscale
