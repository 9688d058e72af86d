#include "posobs/cli.hpp"

#include "posobs/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace posobs::cli {

namespace {

using io::json;

struct SimArgs {
  std::string system_file, design_file;
  double alpha = 0, beta = 0;
  std::vector<double> x0, xhat0, feedback_gain;
  double horizon = 0, step = 1e-3, event_tol = 1e-10;
  bool absolute_output = false, literal_trigger = false;
  std::optional<double> output_floor, periodic_interval, reference_savings;
  std::string trace_out, events_out, manifest_out;
};

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string fmt_vec(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt::format("{:.6g}", v(i));
  return s + "]";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void print_design_report(std::ostream& out, const DesignReport& rep) {
  fmt::print(out, "  A-LC Metzler         : {}\n", yes_no(rep.metzler_ALC));
  fmt::print(out, "  L >= 0               : {}\n", yes_no(rep.L_nonneg));
  fmt::print(out, "  block LMI < 0        : {} (lambda_max = {:.6g})\n", yes_no(rep.lmi_pass), rep.lmi_lambda_max);
  fmt::print(out, "  QA-WC+lambda*Q >= 0  : {} (min entry = {:.6g})\n", yes_no(rep.elementwise_pass), rep.elementwise_min);
  fmt::print(out, "  augmented Hurwitz    : {}\n", yes_no(rep.augmented_hurwitz));
  fmt::print(out, "  observability rank   : {} ({})\n", rep.observability_rank,
             rep.observability_ok ? "full" : "deficient, diagnostic only");
}

int cmd_analyze(const std::string& system_file, const std::string& json_out, std::ostream& out) {
  const auto sys = io::system_from_json(io::read_json_file(system_file));
  const auto rep = posys::analyze(sys);
  fmt::print(out, "system        : {}\n", sys.label().empty() ? system_file : sys.label());
  fmt::print(out, "metzler       : {}\n", rep.metzler);
  fmt::print(out, "output_nonneg : {}\n", rep.output_nonneg);
  if (rep.input_nonneg) fmt::print(out, "input_nonneg  : {}\n", *rep.input_nonneg);
  fmt::print(out, "hurwitz       : {}\n", rep.hurwitz);
  fmt::print(out, "metzler_shift : {:.17g}\n", rep.metzler_shift);
  if (rep.positive_scaling_vector) fmt::print(out, "witness       : {}\n", fmt_vec(*rep.positive_scaling_vector));
  for (const auto& w : sys.warnings()) fmt::print(out, "warning       : {}\n", w);
  if (json_out == "-") {
    out << io::report_to_json(rep).dump(2) << "\n";
  } else if (!json_out.empty()) {
    io::write_text_file(resolve_output_path(json_out), io::report_to_json(rep).dump(2) + "\n");
  }
  return kOk;
}

int run_synthesis(const PositiveLinearSystem& sys, const TriggerConfig& trig,
                  const std::optional<std::vector<double>>& grid, const std::string& out_file,
                  std::ostream& out, std::ostream& err) {
  if (!posys::is_hurwitz_metzler(sys.A()).hurwitz) {
    fmt::print(err, "warning: A is not certified Hurwitz; the design conditions are likely infeasible\n");
  }
  try {
    const auto res = synth::synthesize(sys, trig, grid);
    const auto& d = res.design;
    const auto rep = synth::verify_design(sys, trig, d);
    fmt::print(out, "feasible at lambda = {:.17g} ({} grid points tried)\n", d.lambda, res.attempts.size());
    fmt::print(out, "L      = {}\n", fmt_vec(Eigen::Map<const Vector>(d.L.data(), d.L.size())));
    fmt::print(out, "P diag = {}\n", fmt_vec(d.p));
    fmt::print(out, "Q diag = {}\n", fmt_vec(d.q));
    print_design_report(out, rep);
    if (!out_file.empty()) io::write_text_file(resolve_output_path(out_file), io::design_to_json(d).dump(2) + "\n");
    return kOk;
  } catch (const SynthesisFailed& e) {
    fmt::print(err, "synthesis failed: {}\n", e.what());
    for (const auto& a : e.attempts()) {
      fmt::print(err, "  lambda = {:<12.6g} {:<13} iterations = {:<6} worst violation = {:.3g}  {}\n", a.lambda,
                 lmi::to_string(a.status), a.iterations, a.worst_violation, a.detail);
    }
    return kSynthesisFailed;
  }
}

int run_simulation(const PositiveLinearSystem& sys, const ObserverDesign& design, const TriggerConfig& trig,
                   const SimulationConfig& cfg, const SimArgs& args, std::ostream& out) {
  const auto rep = synth::verify_design(sys, trig, design);
  if (!rep.all_pass()) fmt::print(out, "warning: design does not pass every verification check\n");

  const auto trace = etsim::simulate(sys, design, trig, cfg);
  if (!args.trace_out.empty()) io::write_text_file(resolve_output_path(args.trace_out), io::trace_csv(trace));
  if (!args.events_out.empty()) {
    io::write_text_file(resolve_output_path(args.events_out), io::events_to_json(trace).dump(2) + "\n");
  }

  const auto zeno = etsim::zeno_report(trace, sys.A(), trig.alpha(), cfg.event_time_tol);
  const auto lyap = etsim::lyapunov_trace(trace, design);
  const auto audit = etsim::positivity_audit(trace);
  fmt::print(out, "events            : {}\n", trace.transmissions);
  if (trace.iets.empty()) {
    fmt::print(out, "min IET           : n/a (single event)\n");
  } else {
    fmt::print(out, "min IET           : {:.17g}\n", zeno.min_observed_iet);
  }
  fmt::print(out, "Zeno bound        : {:.17g} ({})\n", zeno.bound, zeno.satisfied ? "respected" : "VIOLATED");
  fmt::print(out, "Lyapunov monotone : {}\n", yes_no(lyap.monotone));
  fmt::print(out, "positivity        : x {} (min {:.3g}), xhat {} (min {:.3g}), e {} (min {:.3g}), eps {} (min {:.3g})\n",
             yes_no(audit.x_nonneg), audit.x_min, yes_no(audit.xhat_nonneg), audit.xhat_min,
             yes_no(audit.e_nonneg), audit.e_min, yes_no(audit.eps_nonneg), audit.eps_min);
  fmt::print(out, "final |e|         : {:.6g}\n", trace.e.back().norm());
  if (args.periodic_interval) {
    const auto s = etsim::savings_report(trace, *args.periodic_interval);
    fmt::print(out, "periodic samples  : {}\n", s.periodic_count);
    fmt::print(out, "savings           : {:.2f}%\n", s.savings_pct);
    if (args.reference_savings) fmt::print(out, "reference savings : {:.2f}%\n", *args.reference_savings);
  }
  return kOk;
}

SimulationConfig make_sim_config(const SimArgs& a) {
  SimulationConfig cfg;
  cfg.x0 = to_vector(a.x0);
  cfg.xhat0 = to_vector(a.xhat0);
  cfg.horizon = a.horizon;
  cfg.step = a.step;
  cfg.event_time_tol = a.event_tol;
  if (!a.feedback_gain.empty()) {
    cfg.feedback_gain = Matrix(to_vector(a.feedback_gain).transpose());
  }
  cfg.use_absolute_output = a.absolute_output;
  cfg.output_floor = a.output_floor;
  cfg.admissibility_guard = !a.literal_trigger;
  return cfg;
}

json sim_manifest(const PositiveLinearSystem& sys, const ObserverDesign& d, const TriggerConfig& trig,
                  const SimulationConfig& cfg, const SimArgs& a) {
  json m;
  m["version"] = io::kVersion;
  m["command"] = "simulate";
  m["system"] = io::system_to_json(sys);
  m["design"] = io::design_to_json(d);
  m["alpha"] = trig.alpha();
  m["beta"] = trig.beta();
  m["config"] = io::sim_config_to_json(cfg);
  m["periodic_interval"] = a.periodic_interval ? json(*a.periodic_interval) : json(nullptr);
  return m;
}

int cmd_simulate(const SimArgs& a, std::ostream& out) {
  const auto sys = io::system_from_json(io::read_json_file(a.system_file));
  const auto design = io::design_from_json(io::read_json_file(a.design_file));
  const TriggerConfig trig(a.alpha, a.beta);
  const auto cfg = make_sim_config(a);
  if (!a.manifest_out.empty()) {
    io::write_text_file(resolve_output_path(a.manifest_out), sim_manifest(sys, design, trig, cfg, a).dump(2) + "\n");
  }
  return run_simulation(sys, design, trig, cfg, a, out);
}

int cmd_replay(const std::string& manifest_file, SimArgs a, std::ostream& out, std::ostream& err) {
  const json m = io::read_json_file(manifest_file);
  const std::string command = m.value("command", std::string{});
  const auto sys = io::system_from_json(m.at("system"));
  const TriggerConfig trig(m.at("alpha").get<double>(), m.at("beta").get<double>());
  if (command == "simulate") {
    const auto design = io::design_from_json(m.at("design"));
    const auto cfg = io::sim_config_from_json(m.at("config"));
    if (m.contains("periodic_interval") && !m["periodic_interval"].is_null()) {
      a.periodic_interval = m["periodic_interval"].get<double>();
    }
    return run_simulation(sys, design, trig, cfg, a, out);
  }
  if (command == "synthesize") {
    std::optional<std::vector<double>> grid;
    if (m.contains("lambda_grid") && !m["lambda_grid"].is_null()) grid = m["lambda_grid"].get<std::vector<double>>();
    return run_synthesis(sys, trig, grid, a.design_file, out, err);
  }
  throw io::ParseError("manifest: unknown command '" + command + "'");
}

int cmd_zeno(const std::string& system_file, std::vector<double> alphas, const std::string& csv_out,
             std::ostream& out) {
  const auto sys = io::system_from_json(io::read_json_file(system_file));
  if (alphas.empty()) throw InvalidInput("zeno: at least one alpha is required");
  std::sort(alphas.begin(), alphas.end());
  const auto curve = etsim::iet_curve(sys.A(), alphas);
  std::string csv = "alpha,bound\n";
  fmt::print(out, "{:>12}  {:>12}\n", "alpha", "bound");
  for (const auto& [al, b] : curve) {
    fmt::print(out, "{:>12.6g}  {:>12.4f}\n", al, b);
    csv += io::format_double(al) + "," + io::format_double(b) + "\n";
  }
  if (!csv_out.empty()) io::write_text_file(resolve_output_path(csv_out), csv);
  return kOk;
}

int cmd_tank(const std::string& params_file, const std::string& out_file, std::ostream& out, std::ostream& err) {
  const auto params = io::tank_parameters_from_json(io::read_json_file(params_file));
  const auto model = models::tank_linearize(params);
  const auto sys = models::tank_system(model);
  fmt::print(out, "areas [m^2]   : {:.6g}, {:.6g}, {:.6g}\n", model.areas[0], model.areas[1], model.areas[2]);
  fmt::print(out, "A metzler     : {}\n", yes_no(posys::is_metzler(model.A)));
  const auto res = models::steady_state_residuals(params);
  fmt::print(out, "C_i H_i0^a_i - Q0 [m^3/s] : {:.3g}, {:.3g}, {:.3g}\n", res[0], res[1], res[2]);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(res[static_cast<std::size_t>(i)]) > 0.05 * params.Q0) {
      fmt::print(err, "warning: tank {} equilibrium outflow differs from Q0 by more than 5%\n", i + 1);
    }
  }
  if (params.K) {
    Matrix k(1, 3);
    k << (*params.K)[0], (*params.K)[1], (*params.K)[2];
    const auto cl = models::tank_closed_loop(model, k);
    if (!cl.metzler) {
      fmt::print(err, "warning: closed-loop matrix A - BK is not Metzler (feedback breaks positivity structure)\n");
    }
    fmt::print(out, "feedback K    : {}\n", fmt_vec(k.row(0).transpose()));
  }
  if (!out_file.empty()) io::write_text_file(resolve_output_path(out_file), io::system_to_json(sys).dump(2) + "\n");
  return kOk;
}

int cmd_solve_lmi(const std::string& problem_file, const std::string& out_file, std::ostream& out) {
  const auto prob = io::problem_from_json(io::read_json_file(problem_file));
  const auto outcome = lmi::solve(prob);
  fmt::print(out, "status     : {}\n", lmi::to_string(outcome.status));
  fmt::print(out, "iterations : {}\n", outcome.iterations);
  if (!outcome.detail.empty()) fmt::print(out, "detail     : {}\n", outcome.detail);
  if (!out_file.empty()) io::write_text_file(resolve_output_path(out_file), io::outcome_to_json(outcome).dump(2) + "\n");
  return outcome.status == lmi::LmiStatus::Feasible ? kOk : kSynthesisFailed;
}

}  // namespace

std::string resolve_output_path(const std::string& path) {
  const char* dir = std::getenv("POSOBS_OUTPUT_DIR");
  if (!dir || !*dir || path.empty() || path == "-") return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / p).string();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-based positive observer synthesis and simulation"};
  app.require_subcommand(1);

  std::string system_file, json_out;
  auto* analyze = app.add_subcommand("analyze", "Positivity and stability analysis of a system file");
  analyze->add_option("system", system_file, "System JSON file")->required();
  analyze->add_option("--json", json_out, "Write the report as JSON (use - for stdout)");

  double alpha = 0, beta = 0;
  std::vector<double> lambda_grid;
  std::string design_out, dump_lmi, synth_manifest;
  auto* synthesize = app.add_subcommand("synthesize", "Synthesize an observer gain");
  synthesize->add_option("system", system_file, "System JSON file")->required();
  synthesize->add_option("--alpha", alpha, "Threshold parameter (> 0)")->required();
  synthesize->add_option("--beta", beta, "Weighting scalar (> 1)")->required();
  synthesize->add_option("--lambda-grid", lambda_grid, "Explicit lambda grid")->delimiter(',');
  synthesize->add_option("--out", design_out, "Design JSON output");
  synthesize->add_option("--dump-lmi", dump_lmi, "Write the LMI problem at the first grid lambda");
  synthesize->add_option("--manifest", synth_manifest, "Write a run manifest");

  SimArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Simulate the event-triggered plant/observer loop");
  simulate->add_option("system", sa.system_file, "System JSON file")->required();
  simulate->add_option("design", sa.design_file, "Design JSON file")->required();
  simulate->add_option("--alpha", sa.alpha, "Threshold parameter (> 0)")->required();
  simulate->add_option("--beta", sa.beta, "Weighting scalar (> 1)")->required();
  simulate->add_option("--x0", sa.x0, "Plant initial state")->delimiter(',')->required();
  simulate->add_option("--xhat0", sa.xhat0, "Observer initial state (default zero)")->delimiter(',');
  simulate->add_option("--horizon", sa.horizon, "Simulated time [s]")->required();
  simulate->add_option("--step", sa.step, "Integration step [s]");
  simulate->add_option("--event-tol", sa.event_tol, "Event time localization tolerance [s]");
  simulate->add_option("--feedback-gain", sa.feedback_gain, "State feedback u = -K h")->delimiter(',');
  simulate->add_flag("--absolute-output", sa.absolute_output, "Trigger on absolute outputs around the equilibrium");
  simulate->add_option("--output-floor", sa.output_floor, "Suppress events once all |y_i| fall below this");
  simulate->add_flag("--literal-trigger", sa.literal_trigger, "Threshold events only (no eps >= 0 guard)");
  simulate->add_option("--periodic-interval", sa.periodic_interval, "Periodic baseline for the savings report");
  simulate->add_option("--reference-savings", sa.reference_savings, "Reference savings [%] printed alongside");
  simulate->add_option("--trace", sa.trace_out, "Trace CSV output");
  simulate->add_option("--events", sa.events_out, "Event log JSON output");
  simulate->add_option("--manifest", sa.manifest_out, "Write a run manifest");

  std::vector<double> alphas;
  std::string zeno_csv;
  auto* zeno = app.add_subcommand("zeno", "Minimum inter-event time bound versus alpha");
  zeno->add_option("system", system_file, "System JSON file")->required();
  zeno->add_option("--alphas", alphas, "Threshold parameters")->delimiter(',')->required();
  zeno->add_option("--csv", zeno_csv, "Write alpha,bound CSV");

  std::string params_file, tank_out;
  auto* tank = app.add_subcommand("tank", "Linearize the three-tank model into a system file");
  tank->add_option("params", params_file, "Tank parameter JSON")->required();
  tank->add_option("--out", tank_out, "System JSON output");

  std::string manifest_file;
  SimArgs ra;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest");
  replay->add_option("manifest", manifest_file, "Manifest JSON")->required();
  replay->add_option("--trace", ra.trace_out, "Trace CSV output");
  replay->add_option("--events", ra.events_out, "Event log JSON output");
  replay->add_option("--out", ra.design_file, "Design JSON output (synthesize manifests)");

  std::string problem_file, outcome_out;
  auto* solve_lmi = app.add_subcommand("solve-lmi", "Solve an LMI feasibility problem file");
  solve_lmi->add_option("problem", problem_file, "Problem JSON")->required();
  solve_lmi->add_option("--out", outcome_out, "Outcome JSON output");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (*analyze) return cmd_analyze(system_file, json_out, out);
    if (*synthesize) {
      const auto sys = io::system_from_json(io::read_json_file(system_file));
      const TriggerConfig trig(alpha, beta);
      std::optional<std::vector<double>> grid;
      if (!lambda_grid.empty()) grid = lambda_grid;
      if (!dump_lmi.empty()) {
        const double lam = grid ? *std::min_element(grid->begin(), grid->end())
                                : synth::default_lambda_grid(sys.A()).front();
        io::write_text_file(resolve_output_path(dump_lmi),
                            io::problem_to_json(synth::build_observer_problem(sys, trig, lam)).dump(2) + "\n");
      }
      if (!synth_manifest.empty()) {
        json m{{"version", io::kVersion}, {"command", "synthesize"}, {"system", io::system_to_json(sys)},
               {"alpha", alpha}, {"beta", beta}, {"lambda_grid", grid ? json(*grid) : json(nullptr)}};
        io::write_text_file(resolve_output_path(synth_manifest), m.dump(2) + "\n");
      }
      return run_synthesis(sys, trig, grid, design_out, out, err);
    }
    if (*simulate) return cmd_simulate(sa, out);
    if (*zeno) return cmd_zeno(system_file, alphas, zeno_csv, out);
    if (*tank) return cmd_tank(params_file, tank_out, out, err);
    if (*replay) return cmd_replay(manifest_file, ra, out, err);
    if (*solve_lmi) return cmd_solve_lmi(problem_file, outcome_out, out);
  } catch (const SimulationAborted& e) {
    fmt::print(err, "simulation aborted at t = {:.17g}: {}\n", e.time(), e.what());
    return kSimulationAborted;
  } catch (const InvalidInput& e) {
    fmt::print(err, "input error: {}\n", e.what());
    return kInputError;
  } catch (const json::exception& e) {
    fmt::print(err, "input error: {}\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInputError;
  }
  return kInputError;
}

}  // namespace posobs::cli
