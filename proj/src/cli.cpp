#include "surgekit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <list>
#include <optional>

#include "surgekit/averaging.hpp"
#include "surgekit/compressor.hpp"
#include "surgekit/control.hpp"
#include "surgekit/csv.hpp"
#include "surgekit/errors.hpp"
#include "surgekit/ode.hpp"
#include "surgekit/scenario.hpp"
#include "surgekit/stability.hpp"
#include "surgekit/svg.hpp"

namespace surgekit {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return format_number(v); }

// Short precision for summary lines only; files keep 9 digits.
std::string brief(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Output {
  fs::path dir;
  bool svg = true;
  std::ostream& out;

  fs::path csv(const Scenario& s, std::string_view suffix = {}) const {
    std::string file = s.text("output.csv");
    if (file.empty()) file = s.name() + ".csv";
    fs::path p = dir / file;
    if (!suffix.empty()) p = dir / (p.stem().string() + std::string(suffix) + ".csv");
    return p;
  }
  fs::path figure(const Scenario& s, std::string_view suffix) const {
    return dir / (csv(s).stem().string() + "_" + std::string(suffix) + ".svg");
  }
  void wrote(const fs::path& p) const { out << "  wrote " << p.generic_string() << '\n'; }
};

void plot(const Output& o, const Scenario& s, std::string_view suffix, const std::vector<Series>& series,
          PlotSpec spec) {
  if (!o.svg) return;
  const fs::path p = o.figure(s, suffix);
  render_svg(series, p, spec);
  o.wrote(p);
}

void write_trajectory(const Output& o, const Trajectory& traj, const fs::path& path, std::size_t decimate) {
  write_csv(decimate > 1 ? traj.decimated(decimate) : traj, path);
  o.wrote(path);
}

// Trapezoidal integral of the squared column.
double integral_of_square(const Trajectory& traj, std::string_view column) {
  const auto v = traj.column(column);
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) acc += 0.5 * (v[i - 1] * v[i - 1] + v[i] * v[i]) * traj.dt();
  return acc;
}

void run_map(const Scenario& s, const Output& o) {
  const CompressorMap map = map_from(s);
  const auto phis = linspace(s.number("table.lo"), s.number("table.hi"), static_cast<std::size_t>(s.integer("table.n")));
  CsvTable table{{"phi", "psi_c", "slope"}, {}};
  Series curve{"psi_c", {}, {}};
  std::size_t peak = 0;
  for (double phi : phis) {
    const double psi = map_pressure_rise(map, phi);
    table.rows.push_back({phi, psi, map_slope(map, phi)});
    curve.x.push_back(phi);
    curve.y.push_back(psi);
    if (psi > table.rows[peak][1]) peak = table.rows.size() - 1;
  }
  o.out << "map " << s.name() << ": " << phis.size() << " rows, largest psi_c = " << brief(table.rows[peak][1])
        << " at phi = " << brief(table.rows[peak][0]) << '\n';
  const fs::path p = o.csv(s);
  write_csv(table, p);
  o.wrote(p);
  plot(o, s, "map", {curve}, {.title = "Compressor characteristic", .x_label = "phi", .y_label = "psi_c"});
}

void run_stability(const Scenario& s, const Output& o) {
  const CompressorMap map = map_from(s);
  const GreitzerParams gains = greitzer_from(s);
  const double lo = s.number("scan.lo"), hi = s.number("scan.hi");
  const auto rows = stability_scan(map, lo, hi, static_cast<std::size_t>(s.integer("scan.n")), gains);
  const double boundary = surge_boundary(map, lo, hi, gains);
  const auto unstable = std::count_if(rows.begin(), rows.end(), [](const StabilityRow& r) {
    return r.classification == FocusClass::unstable_focus;
  });
  o.out << "stability " << s.name() << ": " << rows.size() << " rows on [" << brief(lo) << ", " << brief(hi)
        << "], " << unstable << " unstable\n";
  o.out << "  surge boundary: phi = " << num(boundary) << '\n';
  const fs::path p = o.csv(s);
  write_csv(rows, p);
  o.wrote(p);

  Series delta{"delta", {}, {}}, real{"real part", {}, {}}, bend{"R", {}, {}};
  for (const auto& r : rows) {
    for (Series* ser : {&delta, &real, &bend}) ser->x.push_back(r.phi);
    delta.y.push_back(r.discriminant);
    real.y.push_back(r.real_part);
    bend.y.push_back(r.bendixson_r);
  }
  plot(o, s, "delta", {delta}, {.title = "Discriminant", .x_label = "phi", .y_label = "delta"});
  plot(o, s, "real_part", {real}, {.title = "Eigenvalue real part", .x_label = "phi", .y_label = "Re(lambda)"});
  plot(o, s, "bendixson", {bend}, {.title = "Bendixson indicator", .x_label = "phi", .y_label = "R"});
}

Trajectory run_plant(const Scenario& s, const Output& o, const PlantRun& run) {
  const CompressorMap map = map_from(s);
  const IntegrationSettings is = integration_from(s);
  const std::array<double, 2> x0{run.initial.phi, run.initial.psi};
  Trajectory traj = integrate(greitzer_system(map, run.params), x0, is.dt, is.t_end);

  o.out << to_string(s.kind()) << ' ' << s.name() << ": g = " << brief(run.params.g) << ", equilibrium (phi, psi) = ("
        << brief(run.equilibrium.phi) << ", " << brief(run.equilibrium.psi) << ")";
  if (run.equilibrium.phi > map.domain_lo && run.equilibrium.phi < map.domain_hi) {
    o.out << ", " << to_string(classify(eig_real_part(map, run.equilibrium.phi, run.params)));
  }
  o.out << '\n';
  const auto last = traj.row(traj.size() - 1);
  o.out << "  start (" << brief(x0[0]) << ", " << brief(x0[1]) << "), final at t = " << brief(traj.time(traj.size() - 1))
        << ": (" << brief(last[0]) << ", " << brief(last[1]) << ")\n";
  if (const auto ss = steady_state_of(traj, s.number("steady.window"), s.number("steady.tol"))) {
    o.out << "  steady state: (" << brief((*ss)[0]) << ", " << brief((*ss)[1]) << ")\n";
  } else {
    o.out << "  steady state: none within tolerance\n";
  }

  write_trajectory(o, traj, o.csv(s), is.decimate);

  if (const auto n = static_cast<std::size_t>(s.integer("field.n")); n > 0) {
    const auto phi = traj.column("phi"), psi = traj.column("psi");
    const auto [plo, phi_hi] = std::minmax_element(phi.begin(), phi.end());
    const auto [qlo, psi_hi] = std::minmax_element(psi.begin(), psi.end());
    const double pp = 0.1 * std::max(*phi_hi - *plo, 1e-3), qp = 0.1 * std::max(*psi_hi - *qlo, 1e-3);
    const auto field = vector_field_grid(map, run.params.g, {*plo - pp, *phi_hi + pp},
                                         {std::max(*qlo - qp, 1e-3), *psi_hi + qp}, n);
    CsvTable table{{"phi", "psi", "dphi", "dpsi"}, {}};
    for (const auto& f : field) table.rows.push_back({f.state.phi, f.state.psi, f.derivative.phi, f.derivative.psi});
    const fs::path p = o.csv(s, "_field");
    write_csv(table, p);
    o.wrote(p);
  }

  const Trajectory shown = is.decimate > 1 ? traj.decimated(is.decimate) : traj;
  plot(o, s, "time", {time_series(shown, "phi"), time_series(shown, "psi")},
       {.title = "Surge model response", .y_label = "phi, psi"});
  plot(o, s, "phase", {phase_series(shown, "phi", "psi", "orbit")},
       {.title = "Phase plane", .x_label = "phi", .y_label = "psi", .phase_plane = true});
  return traj;
}

void run_simulate(const Scenario& s, const Output& o) { run_plant(s, o, plant_run_from(s)); }

void run_limit_cycle(const Scenario& s, const Output& o) {
  const Trajectory traj = run_plant(s, o, plant_run_from(s));
  LimitCycleOptions opts;
  opts.settle_fraction = s.number("limit_cycle.settle");
  opts.tol = s.number("limit_cycle.tol");
  const LimitCycleReport rep = detect_limit_cycle(traj, opts);
  if (rep.detected) {
    o.out << "  limit cycle: detected, phi amplitude " << brief(rep.amplitude_phi) << ", psi amplitude "
          << brief(rep.amplitude_psi) << ", period " << brief(rep.period) << " (" << rep.cycles_analyzed
          << " cycles)\n";
  } else {
    o.out << "  limit cycle: not detected (" << rep.cycles_analyzed << " cycles, amplitude spread "
          << brief(rep.amplitude_spread) << ")\n";
  }
}

void run_tune(const Scenario& s, const Output& o) {
  const ZnRule rule = parse_zn_rule(s.text("tune.rule"));
  std::optional<double> L = s.optional_number("tune.L"), T = s.optional_number("tune.T");
  const auto lags = tune_lags(s);
  o.out << "tune " << s.name() << ":\n";
  if (!lags.empty()) {
    const IntegrationSettings is = integration_from(s);
    const Trajectory step = lag_cascade_step_response(lags, is.dt, is.t_end);
    const ReactionCurve rc = extract_LT(step);
    o.out << "  reaction curve of " << lags.size() << " lags: L = " << brief(rc.dead_time)
          << ", T = " << brief(rc.time_constant) << '\n';
    write_trajectory(o, step, o.csv(s, "_step"), is.decimate);
    plot(o, s, "step", {time_series(step, "y", "step response")}, {.title = "Reaction curve", .y_label = "y"});
    if (!L) {
      L = rc.dead_time;
      T = rc.time_constant;
    }
  }
  const ZnGains z = zn_gains(*L, *T, rule);
  o.out << "  Ziegler-Nichols " << to_string(rule) << " (L = " << brief(*L) << ", T = " << brief(*T)
        << "): Kp = " << brief(z.kp) << ", Ki = " << brief(z.ki) << ", Kd = " << brief(z.kd) << '\n';
  CsvTable table{{"L", "T", "kp", "ki", "kd", "td"}, {{*L, *T, z.kp, z.ki, z.kd, z.td}}};
  const fs::path p = o.csv(s);
  write_csv(table, p);
  o.wrote(p);
}

struct LoopSummary {
  double final_e = 0.0;
  double ise = 0.0;
};

LoopSummary summarize_loop(const ClosedLoopScenario& c, const Trajectory& traj, double surge_flow,
                           std::ostream& out) {
  const std::size_t last = traj.size() - 1;
  auto at = [&](std::string_view col) { return traj.at(last, traj.column_index(col)); };
  const auto y = traj.column("y");
  const auto min_it = std::min_element(y.begin(), y.end());
  const auto below = std::count_if(y.begin(), y.end(), [&](double v) { return v < surge_flow; });
  LoopSummary sum{at("e"), integral_of_square(traj, "e")};

  out << "  " << to_string(c.controller.kind) << ": final y = " << brief(at("y")) << ", e = " << brief(sum.final_e)
      << ", ISE = " << brief(sum.ise) << '\n';
  if (c.controller.kind == ControllerKind::adaptive) {
    out << "    k: (" << brief(c.controller.k1) << ", " << brief(c.controller.k2) << ", " << brief(c.controller.k3)
        << ") -> (" << brief(at("k1")) << ", " << brief(at("k2")) << ", " << brief(at("k3")) << ")\n";
  }
  out << "    min y = " << brief(*min_it) << " at t = " << brief(traj.time(static_cast<std::size_t>(min_it - y.begin())))
      << "; below surge flow " << brief(surge_flow) << ": " << (below > 0 ? "yes" : "no");
  if (below > 0) out << " (" << below << " samples)";
  out << '\n';
  if (c.observe_compressor) {
    const auto psi = traj.column("psi");
    out << "    observed compressor: min psi = " << brief(*std::min_element(psi.begin(), psi.end())) << '\n';
  }
  return sum;
}

void run_closedloop(const Scenario& s, const Output& o) {
  const ClosedLoopScenario c = closed_loop_from(s);
  const IntegrationSettings is = integration_from(s);
  const double surge_flow = s.number("loop.surge_flow");
  const bool compare = s.flag("loop.compare_adaptive") && c.controller.kind != ControllerKind::adaptive;

  std::vector<ClosedLoopScenario> runs{c};
  if (compare) {
    ClosedLoopScenario twin = c;
    twin.name = c.name + "_adaptive";
    twin.controller.kind = ControllerKind::adaptive;
    runs.push_back(twin);
  }
  const auto trajs = simulate_batch(runs);

  o.out << "closedloop " << s.name() << ": disturbance " << brief(c.disturbance.initial) << " -> "
        << brief(c.disturbance.target) << ", r = " << brief(c.controller.reference) << ", t_end = " << brief(c.t_end)
        << '\n';
  const LoopSummary primary = summarize_loop(c, trajs[0], surge_flow, o.out);
  write_trajectory(o, trajs[0], o.csv(s), is.decimate);
  if (compare) {
    const LoopSummary twin = summarize_loop(runs[1], trajs[1], surge_flow, o.out);
    o.out << "  comparison: terminal |e| " << to_string(c.controller.kind) << " " << brief(std::abs(primary.final_e))
          << " vs adaptive " << brief(std::abs(twin.final_e)) << "; ISE " << brief(primary.ise) << " vs "
          << brief(twin.ise) << '\n';
    write_trajectory(o, trajs[1], o.csv(s, "_adaptive"), is.decimate);
  }

  if (!o.svg) return;
  const Trajectory shown = is.decimate > 1 ? trajs[0].decimated(is.decimate) : trajs[0];
  std::vector<Series> flow{time_series(shown, "y", "y"), time_series(shown, "ym", "ym"),
                           time_series(shown, "d", "d")};
  if (compare) {
    const Trajectory t2 = is.decimate > 1 ? trajs[1].decimated(is.decimate) : trajs[1];
    flow.push_back(time_series(t2, "y", "y (adaptive)"));
  }
  plot(o, s, "flow", flow, {.title = "Inlet flow", .y_label = "flow"});
  plot(o, s, "valve", {time_series(shown, "u"), time_series(shown, "co")},
       {.title = "Control signal and valve flow", .y_label = "u, co"});
  if (c.controller.kind == ControllerKind::adaptive) {
    plot(o, s, "params", {time_series(shown, "k1"), time_series(shown, "k2"), time_series(shown, "k3")},
         {.title = "Adaptive parameters", .y_label = "k"});
  }
  if (c.observe_compressor) {
    plot(o, s, "phase", {phase_series(shown, "phi", "psi", "compressor")},
         {.title = "Observed compressor", .x_label = "phi", .y_label = "psi", .phase_plane = true});
  }
}

void run_averaging(const Scenario& s, const Output& o) {
  AveragedPoint base = averaged_base_from(s);
  const auto grid = averaging_grid(s.number("averaging.k1_lo"), s.number("averaging.k1_hi"),
                                   s.number("averaging.k2_lo"), s.number("averaging.k2_hi"),
                                   static_cast<std::size_t>(s.integer("averaging.n")), base);
  const auto rows = stability_verdict(grid);
  const auto stable = std::count_if(rows.begin(), rows.end(), [](const AveragingRow& r) { return r.stable; });
  o.out << "averaging " << s.name() << ": " << rows.size() << " points, " << stable << " stable, "
        << rows.size() - static_cast<std::size_t>(stable) << " unstable\n";
  base.k1 = s.number("controller.k1");
  base.k2 = s.number("controller.k2");
  const auto lam = averaged_eigenvalues(base);
  o.out << "  at (k1, k2) = (" << brief(base.k1) << ", " << brief(base.k2) << "): eigenvalues " << num(lam[0]) << ", "
        << num(lam[1]) << ", " << num(lam[2]) << '\n';
  const fs::path p = o.csv(s);
  write_csv(rows, p);
  o.wrote(p);
}

void dispatch(const Scenario& s, const Output& o) {
  switch (s.kind()) {
    case ScenarioKind::map: return run_map(s, o);
    case ScenarioKind::stability: return run_stability(s, o);
    case ScenarioKind::simulate: return run_simulate(s, o);
    case ScenarioKind::limit_cycle: return run_limit_cycle(s, o);
    case ScenarioKind::tune: return run_tune(s, o);
    case ScenarioKind::closedloop: return run_closedloop(s, o);
    case ScenarioKind::averaging: return run_averaging(s, o);
  }
}

// A subcommand flag that writes straight into a scenario key.
struct Shortcut {
  std::string key;
  std::string value;
  bool is_switch = false;
  CLI::Option* opt = nullptr;
};

struct Command {
  CLI::App* app = nullptr;
  std::optional<ScenarioKind> kind;  // empty for `run`
  std::list<Shortcut> shortcuts;

  void option(const std::string& flag, const std::string& key, const std::string& help) {
    auto& s = shortcuts.emplace_back();
    s.key = key;
    s.opt = app->add_option(flag, s.value, help + " (" + key + ")");
  }
  void toggle(const std::string& flag, const std::string& key, const std::string& help) {
    auto& s = shortcuts.emplace_back();
    s.key = key;
    s.is_switch = true;
    s.opt = app->add_flag(flag)->description(help + " (" + key + ")");
  }
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressor surge analysis and anti-surge control simulation", "surgekit"};
  app.require_subcommand(1);

  std::string scenario_ref, out_dir;
  std::vector<std::string> overrides;
  bool no_svg = false;
  std::list<Command> commands;

  auto make = [&](const std::string& name, std::optional<ScenarioKind> kind, const std::string& help) -> Command& {
    auto& c = commands.emplace_back();
    c.app = app.add_subcommand(name, help);
    c.kind = kind;
    if (kind) c.app->add_option("--scenario", scenario_ref, "scenario file or catalog name");
    c.app->add_option("--out-dir", out_dir, "output directory (default $SURGEKIT_OUT_DIR or ./out)");
    c.app->add_option("--set", overrides, "override a scenario key, key=value (repeatable)");
    c.app->add_flag("--no-svg", no_svg, "skip SVG figures");
    c.option("--name", "name", "output name");
    return c;
  };

  auto& map = make("map", ScenarioKind::map, "tabulate the compressor characteristic");
  map.option("--lo", "table.lo", "first flow");
  map.option("--hi", "table.hi", "last flow");
  map.option("--n", "table.n", "rows");

  auto& stab = make("stability", ScenarioKind::stability, "eigenvalue scan along the equilibrium curve");
  stab.option("--lo", "scan.lo", "first flow");
  stab.option("--hi", "scan.hi", "last flow");
  stab.option("--n", "scan.n", "rows");

  for (auto kind : {ScenarioKind::simulate, ScenarioKind::limit_cycle}) {
    auto& sim = make(std::string(to_string(kind)), kind,
                     kind == ScenarioKind::simulate ? "open-loop surge-model run" : "surge-model run with limit-cycle detection");
    sim.option("--flow", "plant.flow", "equilibrium flow selecting g");
    sim.option("--g", "plant.g", "throttle parameter");
    sim.option("--phi0", "plant.phi0", "initial flow");
    sim.option("--psi0", "plant.psi0", "initial pressure");
    sim.option("--dt", "integration.dt", "step");
    sim.option("--t-end", "integration.t_end", "horizon");
    sim.option("--field", "field.n", "vector-field grid size");
  }

  auto& tune = make("tune", ScenarioKind::tune, "Ziegler-Nichols tuning from a reaction curve");
  tune.option("--L", "tune.L", "dead time");
  tune.option("--T", "tune.T", "time constant");
  tune.option("--kind", "tune.rule", "P, PI or PID");
  tune.option("--lags", "tune.lags", "lag cascade to simulate");

  auto& loop = make("closedloop", ScenarioKind::closedloop, "closed-loop anti-surge simulation");
  loop.option("--controller", "controller.kind", "fixed-pd, fixed-pid or adaptive");
  loop.option("--disturbance", "disturbance.target", "disturbance target");
  loop.option("--gamma", "controller.gamma", "adaptation gain");
  loop.option("--dt", "integration.dt", "step");
  loop.option("--t-end", "integration.t_end", "horizon");
  loop.toggle("--observe", "loop.observe_compressor", "drive a surge model with the inlet flow");
  loop.toggle("--compare", "loop.compare_adaptive", "also run the adaptive law");

  auto& avg = make("averaging", ScenarioKind::averaging, "averaged parameter-dynamics stability grid");
  avg.option("--n", "averaging.n", "grid points per axis");
  avg.option("--gamma", "averaging.gamma", "adaptation gain");
  avg.option("--r", "averaging.r", "reference");

  auto& run = make("run", std::nullopt, "run a scenario file or catalog entry with its own kind");
  run.app->add_option("scenario", scenario_ref, "scenario file or catalog name")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "surgekit: error: " << e.what() << '\n';
    return kExitUsage;
  }

  const Command* cmd = nullptr;
  for (const auto& c : commands) {
    if (c.app->parsed()) cmd = &c;
  }

  try {
    Scenario s = scenario_ref.empty() ? Scenario{} : load_scenario(find_scenario(scenario_ref));
    if (cmd->kind) {
      if (s.is_set("kind") && s.kind() != *cmd->kind) {
        throw ConfigError("scenario '" + s.name() + "' is of kind " + std::string(to_string(s.kind())) +
                              ", not " + std::string(to_string(*cmd->kind)),
                          "kind");
      }
      s.set("kind", to_string(*cmd->kind));
    }
    for (const auto& sc : cmd->shortcuts) {
      if (sc.opt->count() > 0) s.set(sc.key, sc.is_switch ? "true" : sc.value);
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      s.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    validate_scenario(s);

    fs::path dir = out_dir;
    if (dir.empty()) {
      const char* env = std::getenv("SURGEKIT_OUT_DIR");
      dir = env && *env ? fs::path(env) : fs::path("out");
    }
    const Output o{dir, !no_svg && s.flag("output.svg"), out};
    dispatch(s, o);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "surgekit: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "surgekit: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DivergenceError& e) {
    err << "surgekit: integration diverged at t = " << brief(e.time()) << ": " << e.what() << '\n';
    return kExitModel;
  } catch (const Error& e) {
    err << "surgekit: model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    err << "surgekit: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace surgekit
