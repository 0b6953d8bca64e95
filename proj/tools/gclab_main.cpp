// Experiment runner: metric analysis, viscous solves, vanishing-viscosity
// sweeps, decay checks and surface reconstruction, driven by a sectioned
// key-value config. Every command writes a self-describing bundle into the
// output directory (config echo, manifest with input checksums, data files).
//
// Exit codes: 0 success, 2 config error, 3 numerical abort, 4 missing input.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gclab/config.hpp"
#include "gclab/diagnostics.hpp"
#include "gclab/errors.hpp"
#include "gclab/io.hpp"
#include "gclab/metric.hpp"
#include "gclab/reconstruct.hpp"
#include "gclab/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gclab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitMissingInput = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

struct Bundle {
  fs::path dir;
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& content) {
    write_text_atomic((dir / name).string(), content);
    outputs.push_back(name);
  }
};

struct Workspace {
  ExperimentConfig cfg;
  ProfilePtr profile;
  MetricSolution metric;
  double t1 = 0.0;
  double t2 = 0.0;
};

Workspace prepare(const CommonOpts& opts, bool need_times) {
  Workspace ws;
  ws.cfg = parse_config_file(opts.config_path);
  if (opts.seed) ws.cfg.solver.seed = *opts.seed;
  ws.profile = ws.cfg.profile.make();
  ws.metric = solve_h(ws.profile, ws.cfg.metric.t_max, ws.cfg.metric.step, ws.cfg.metric.tolerance);
  if (need_times) {
    ws.t1 = ws.cfg.solver.t1_auto ? 2.0 * find_T_star(ws.metric, *ws.profile) : ws.cfg.solver.t1;
    ws.t2 = ws.cfg.solver.t2.value_or(ws.t1 + ws.cfg.solver.t_end_offset);
    if (ws.t2 > ws.metric.t_max()) {
      // Extend the metric grid to cover the requested solve window.
      ws.metric = solve_h(ws.profile, ws.t2 * 1.02 + 1.0, ws.cfg.metric.step,
                          ws.cfg.metric.tolerance);
    }
  }
  return ws;
}

void write_manifest(Bundle& bundle, const CommonOpts& opts, const std::string& command,
                    std::uint64_t seed) {
  json m;
  m["tool"] = kVersionString;
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = {{"path", opts.config_path},
                 {"fnv1a64", hex64(fnv1a64_file(opts.config_path))}};
  json outs = json::array();
  for (const std::string& name : bundle.outputs) {
    outs.push_back({{"name", name}, {"fnv1a64", hex64(fnv1a64_file((bundle.dir / name).string()))}});
  }
  m["outputs"] = outs;
  m["created_unix"] = static_cast<long long>(std::time(nullptr));
  write_text_atomic((bundle.dir / "manifest.json").string(), m.dump(2) + "\n");
}

Bundle open_bundle(const CommonOpts& opts, const ExperimentConfig& cfg) {
  Bundle bundle;
  bundle.dir = opts.out_dir;
  fs::create_directories(bundle.dir);
  bundle.write("config.echo.ini", cfg.raw);
  return bundle;
}

json margins_json(const RegionMargins& m) {
  return {{"u_lower", m.u_lower},
          {"u_upper", m.u_upper},
          {"v_lower", m.v_lower},
          {"v_upper", m.v_upper},
          {"min", m.min()}};
}

int cmd_metric(const CommonOpts& opts) {
  Workspace ws = prepare(opts, /*need_times=*/false);
  Bundle bundle = open_bundle(opts, ws.cfg);

  const C1Result c1 = compute_C1(*ws.profile);
  double t_star = -1.0;
  bool has_t_star = true;
  try {
    t_star = find_T_star(ws.metric, *ws.profile);
  } catch (const NotFoundError&) {
    has_t_star = false;
  }

  bool phi_admissible = false;
  double phi_end = 0.0;
  if (has_t_star) {
    try {
      const double T = 2.0 * t_star;
      const PhiSolution phi =
          phi_explicit(ws.metric, *ws.profile, T, ws.cfg.solver.psi0, ws.metric.t_max());
      phi_admissible = true;
      const std::vector<double>& vals = phi.values();
      for (std::size_t i = 1; i < vals.size(); ++i) {
        if (!(vals[i] < vals[i - 1]) || !(vals[i] > 0.0)) {
          phi_admissible = false;
          break;
        }
      }
      phi_end = vals.back();
    } catch (const std::exception&) {
      phi_admissible = false;
    }
  }

  // Integer scan of the log-decay sufficiency test over the [decay] range.
  int p_threshold = -1;
  json scan = json::array();
  for (double p = ws.cfg.decay.p_min; p <= ws.cfg.decay.p_max + 1e-12; p += ws.cfg.decay.p_step) {
    const DecayReport r = decay_sufficiency_log(p);
    scan.push_back({{"p", p},
                    {"value_109", r.value_109},
                    {"satisfied_109", r.satisfied_109},
                    {"value_ln3", r.value_ln3},
                    {"satisfied_ln3", r.satisfied_ln3}});
    if (p_threshold < 0 && r.satisfied_109) p_threshold = static_cast<int>(std::lround(p));
  }

  const std::size_t stride = std::max<std::size_t>(1, ws.metric.size() / 20000);
  bundle.write("metric.csv", metric_csv(ws.metric, stride));

  json summary;
  summary["profile"] = ws.profile->describe();
  summary["C1"] = c1.value;
  summary["C1_error_bound"] = c1.error_bound;
  summary["int_k"] = c1.int_k;
  summary["int_sk"] = c1.int_sk;
  summary["T_star"] = has_t_star ? json(t_star) : json(nullptr);
  summary["phi_admissible"] = phi_admissible;
  summary["phi_final_value"] = phi_end;
  summary["p_threshold"] = p_threshold;
  summary["p_scan"] = scan;
  summary["metric_richardson_error"] = ws.metric.richardson_error();
  bundle.write("summary.json", summary.dump(2) + "\n");

  write_manifest(bundle, opts, "metric", ws.cfg.solver.seed);
  return 0;
}

int cmd_solve(const CommonOpts& opts) {
  Workspace ws = prepare(opts, /*need_times=*/true);
  Bundle bundle = open_bundle(opts, ws.cfg);
  const SolverConfig scfg = [&] {
    SolverConfig c = ws.cfg.solver.build(ws.t1);
    c.t_end = ws.t2;
    return c;
  }();

  Trajectory traj;
  try {
    traj = solve(scfg, ws.metric);
  } catch (const SolverAbort& abort) {
    // Diagnostic snapshot, then the numerical-abort exit path.
    Trajectory snap;
    snap.config = scfg;
    snap.snapshots.push_back(abort.snapshot());
    bundle.write("abort_snapshot.csv", trajectory_csv(snap));
    write_manifest(bundle, opts, "solve", scfg.seed);
    json err;
    err["error"] = abort.what();
    err["type"] = "numerical";
    err["exit_code"] = kExitNumerical;
    err["snapshot"] = (bundle.dir / "abort_snapshot.csv").string();
    std::cerr << err.dump() << "\n";
    return kExitNumerical;
  }

  bundle.write("trajectory.csv", trajectory_csv(traj));
  save_checkpoint(traj, (bundle.dir / "trajectory.ckpt").string());
  bundle.outputs.push_back("trajectory.ckpt");
  bundle.write("monitor.csv", monitor_csv(traj));

  double min_margin = std::numeric_limits<double>::infinity();
  double min_gap_run = std::numeric_limits<double>::infinity();
  double worst_gap_slack = std::numeric_limits<double>::infinity();
  RegionMargins final_margins = traj.monitor.empty() ? RegionMargins{} : traj.monitor.back().margins;
  for (const MonitorRecord& r : traj.monitor) {
    min_margin = std::min(min_margin, r.margins.min());
    min_gap_run = std::min(min_gap_run, r.min_gap);
    worst_gap_slack =
        std::min(worst_gap_slack, r.min_gap - 2.0 * std::exp(-r.t) * scfg.psi0);
  }

  json summary;
  summary["profile"] = ws.profile->describe();
  summary["config"] = {{"representation", scfg.rep == Representation::kLM ? "lm" : "uv"},
                       {"J", scfg.J},
                       {"t1", scfg.t_begin},
                       {"t2", scfg.t_end},
                       {"mu", scfg.mu},
                       {"psi0", scfg.psi0},
                       {"data", data_kind_name(scfg.data)},
                       {"data_inset", scfg.data_inset},
                       {"seed", scfg.seed},
                       {"snapshots", scfg.snapshots},
                       {"cfl", scfg.scheme.cfl},
                       {"dt_max", scfg.scheme.dt_max},
                       {"gap_min", scfg.scheme.gap_min},
                       {"flag_theta", scfg.scheme.flag_theta},
                       {"flag_kappa", scfg.scheme.flag_kappa}};
  summary["steps"] = traj.steps;
  summary["min_region_margin"] = min_margin;
  summary["final_margins"] = margins_json(final_margins);
  summary["min_gap"] = min_gap_run;
  summary["min_gap_minus_2exp_bound"] = worst_gap_slack;
  bundle.write("summary.json", summary.dump(2) + "\n");

  write_manifest(bundle, opts, "solve", scfg.seed);
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  Workspace ws = prepare(opts, /*need_times=*/true);
  Bundle bundle = open_bundle(opts, ws.cfg);
  SolverConfig base = ws.cfg.solver.build(ws.t1);
  base.t_end = ws.t2;

  std::optional<Window> window;
  if (ws.cfg.sweep.window_t0 || ws.cfg.sweep.window_t1) {
    Window w;
    w.t0 = ws.cfg.sweep.window_t0.value_or(ws.t1);
    w.t1 = ws.cfg.sweep.window_t1.value_or(ws.t2);
    window = w;
  }
  const SweepReport rep = mu_sweep(base, ws.metric, ws.cfg.sweep.mu_list, window, opts.jobs);

  json out;
  out["profile"] = ws.profile->describe();
  out["mus"] = rep.mus;
  out["window"] = {{"t0", rep.window.t0}, {"t1", rep.window.t1},
                   {"x0", rep.window.x0}, {"x1", rep.window.x1}};
  out["test_bank_version"] = rep.bank_version;
  out["consecutive_l1"] = rep.consecutive_l1;
  out["sup_dissipation_l"] = rep.sup_dissipation_l;
  out["dissipation_slope"] = rep.dissipation_slope;
  out["uniform_linf"] = rep.uniform_linf;
  out["finest_gauss_residual"] = rep.finest_gauss_residual;
  json entries = json::array();
  for (const SweepEntry& e : rep.entries) {
    json je;
    je["mu"] = e.mu;
    je["completed"] = e.completed;
    if (!e.completed) je["failure"] = e.failure;
    if (e.completed) {
      je["min_margin"] = e.min_margin;
      je["min_gap"] = e.min_gap;
      je["linf_lmn"] = e.linf_lmn;
      je["dissipation_l"] = e.dissipation.space_time_l;
      je["dissipation_m"] = e.dissipation.space_time_m;
    }
    entries.push_back(je);
  }
  out["runs"] = entries;
  bundle.write("sweep.json", out.dump(2) + "\n");

  std::ostringstream res;
  res << "chi_id,mu,law,residual\n";
  for (const SweepEntry& e : rep.entries) {
    if (!e.completed) continue;
    for (const WeakResidual& r : e.residuals) {
      res << r.chi_id << ',' << format_double(e.mu) << ",l," << format_double(r.law_l) << '\n';
      res << r.chi_id << ',' << format_double(e.mu) << ",m," << format_double(r.law_m) << '\n';
    }
  }
  bundle.write("residuals.csv", res.str());

  write_manifest(bundle, opts, "sweep", base.seed);
  return 0;
}

int cmd_reconstruct(const CommonOpts& opts) {
  ExperimentConfig cfg = parse_config_file(opts.config_path);
  if (opts.seed) cfg.solver.seed = *opts.seed;
  Bundle bundle = open_bundle(opts, cfg);
  const ReconstructSpec& spec = cfg.reconstruct;

  FormField field = make_plane_field(2, 2);
  if (spec.source == "plane") {
    field = make_plane_field(spec.nx, spec.nt);
  } else if (spec.source == "cylinder") {
    field = make_cylinder_field(spec.nx, spec.nt, spec.radius, spec.x_extent);
  } else {
    const fs::path bdir = spec.bundle;
    const fs::path ckpt = bdir / "trajectory.ckpt";
    const fs::path echo = bdir / "config.echo.ini";
    if (!fs::exists(ckpt) || !fs::exists(echo)) {
      throw IoError("reconstruct: trajectory bundle incomplete under " + bdir.string());
    }
    const ExperimentConfig src = parse_config_file(echo.string());
    const CheckpointData data = load_checkpoint(ckpt.string());
    ProfilePtr profile = src.profile.make();
    const double t_last = data.snapshots.back().t;
    MetricSolution metric =
        solve_h(profile, t_last * 1.02 + 1.0, src.metric.step, src.metric.tolerance);
    Trajectory traj;
    traj.config = src.solver.build(data.snapshots.front().t);
    traj.config.rep = data.rep;
    traj.config.J = data.snapshots.front().size();
    traj.snapshots = data.snapshots;
    field = field_from_trajectory(traj, metric);
  }

  const ImmersionSurface surface = frame_integrate(field, spec.frame);
  const FormResiduals res = verify_forms(surface, field);

  // Path-independence probe: rerun with the transverse sweep order.
  FrameOptions alt = spec.frame;
  alt.order = spec.frame.order == IntegrationOrder::kTFirst ? IntegrationOrder::kXFirst
                                                            : IntegrationOrder::kTFirst;
  const ImmersionSurface other = frame_integrate(field, alt);
  double path_gap = 0.0;
  for (std::size_t i = 0; i < surface.y.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      path_gap = std::max(path_gap, std::abs(surface.y[i][c] - other.y[i][c]));
    }
  }

  export_obj(surface, (bundle.dir / "surface.obj").string());
  bundle.outputs.push_back("surface.obj");

  json out;
  out["source"] = spec.source;
  out["nx"] = surface.nx;
  out["nt"] = surface.nt;
  out["order"] = spec.frame.order == IntegrationOrder::kTFirst ? "t_first" : "x_first";
  out["reproject_every"] = spec.frame.reproject_every;
  out["gauss_codazzi_residual"] = field.gauss_residual();
  out["first_form_max"] = res.first_max;
  out["first_form_l2"] = res.first_l2;
  out["second_form_max"] = res.second_max;
  out["second_form_l2"] = res.second_l2;
  out["normal_orthogonality"] = res.normal_orthogonality;
  out["gram_drift"] = surface.gram_drift;
  out["normal_norm_drift"] = surface.normal_norm_drift;
  out["max_edge_rotation"] = surface.max_edge_rotation;
  out["path_independence_gap"] = path_gap;
  bundle.write("reconstruct.json", out.dump(2) + "\n");

  write_manifest(bundle, opts, "reconstruct", cfg.solver.seed);
  return 0;
}

int cmd_verify_decay(const CommonOpts& opts) {
  ExperimentConfig cfg = parse_config_file(opts.config_path);
  Bundle bundle = open_bundle(opts, cfg);

  json rows = json::array();
  double first_109 = -1.0, first_ln3 = -1.0;
  for (double p = cfg.decay.p_min; p <= cfg.decay.p_max + 1e-12; p += cfg.decay.p_step) {
    const DecayReport r = decay_sufficiency_log(p);
    rows.push_back({{"p", r.p},
                    {"value_109", r.value_109},
                    {"satisfied_109", r.satisfied_109},
                    {"value_ln3", r.value_ln3},
                    {"satisfied_ln3", r.satisfied_ln3},
                    {"int_sk_quadrature", r.int_sk_quadrature},
                    {"int_sk_bound", r.int_sk_bound},
                    {"sk_bound_holds", r.sk_bound_holds},
                    {"int_k", r.int_k},
                    {"C1", r.c1},
                    {"primitive_inequality_holds", r.primitive_inequality_holds}});
    if (first_109 < 0.0 && r.satisfied_109) first_109 = p;
    if (first_ln3 < 0.0 && r.satisfied_ln3) first_ln3 = p;
  }
  json out;
  out["scan"] = rows;
  out["first_satisfied_109"] = first_109;
  out["first_satisfied_ln3"] = first_ln3;
  bundle.write("decay.json", out.dump(2) + "\n");

  write_manifest(bundle, opts, "verify-decay", cfg.solver.seed);
  return 0;
}

int report_error(const std::string& type, const std::string& what, int code) {
  json err;
  err["error"] = what;
  err["type"] = type;
  err["exit_code"] = code;
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gclab: viscous Gauss-Codazzi solver and isometric-immersion laboratory"};
  app.require_subcommand(1);

  CommonOpts opts;
  const char* env_out = std::getenv("OUTPUT_DIR");
  opts.out_dir = env_out != nullptr ? env_out : "out";

  std::string command;
  for (const auto& [name, desc] :
       std::vector<std::pair<std::string, std::string>>{
           {"metric", "metric ODE analysis: C1, sign-switch time, comparison function"},
           {"solve", "single viscous solve with invariant-region monitors"},
           {"sweep", "vanishing-viscosity sweep with compactness diagnostics"},
           {"reconstruct", "frame integration of a form field into a surface mesh"},
           {"verify-decay", "log-decay sufficiency scan"}}) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opts.config_path, "experiment config file")->required();
    sub->add_option("--out", opts.out_dir, "output bundle directory");
    sub->add_option("--jobs", opts.jobs, "max concurrent solves (sweep)");
    sub->add_option("--seed", opts.seed, "override [solver] seed");
    sub->callback([&command, name = name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    return report_error("cli", e.what(), kExitConfig);
  }

  try {
    if (command == "metric") return cmd_metric(opts);
    if (command == "solve") return cmd_solve(opts);
    if (command == "sweep") return cmd_sweep(opts);
    if (command == "reconstruct") return cmd_reconstruct(opts);
    if (command == "verify-decay") return cmd_verify_decay(opts);
    return report_error("cli", "no command selected", kExitConfig);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), kExitConfig);
  } catch (const SolverAbort& e) {
    return report_error("numerical", e.what(), kExitNumerical);
  } catch (const IoError& e) {
    const bool missing = std::string(e.what()).find("bundle") != std::string::npos;
    return report_error("io", e.what(), missing ? kExitMissingInput : 1);
  } catch (const std::exception& e) {
    return report_error("numerical", e.what(), kExitNumerical);
  }
}
