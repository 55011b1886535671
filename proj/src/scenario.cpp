#include "surgekit/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "surgekit/errors.hpp"

#ifndef SURGEKIT_SCENARIO_DIR
#define SURGEKIT_SCENARIO_DIR "scenarios"
#endif

namespace surgekit {

namespace {

// clang-format off
constexpr KeySpec kKeys[] = {
  {"name", ValueType::text, "default", "scenario identifier; also the stem of output files"},
  {"kind", ValueType::text, "closedloop", "map | stability | simulate | limit-cycle | tune | closedloop | averaging"},

  {"map.psi0", ValueType::number, "0.352", "characteristic offset"},
  {"map.h", ValueType::number, "0.18", "characteristic amplitude"},
  {"map.slope", ValueType::number, "4", "z = slope*phi + offset"},
  {"map.offset", ValueType::number, "-1", "z = slope*phi + offset"},
  {"map.c0", ValueType::number, "1", "bracket coefficient of z^0"},
  {"map.c1", ValueType::number, "1.5", "bracket coefficient of z^1"},
  {"map.c2", ValueType::number, "0", "bracket coefficient of z^2"},
  {"map.c3", ValueType::number, "-0.5", "bracket coefficient of z^3"},
  {"map.lo", ValueType::number, "0", "lower flow bound"},
  {"map.hi", ValueType::number, "0.8", "upper flow bound"},

  {"table.lo", ValueType::number, "0", "map table: first flow value"},
  {"table.hi", ValueType::number, "0.8", "map table: last flow value"},
  {"table.n", ValueType::integer, "81", "map table: number of rows"},

  {"greitzer.a", ValueType::number, "0.8", "flow-equation gain"},
  {"greitzer.b", ValueType::number, "1.25", "pressure-equation gain"},

  {"plant.flow", ValueType::number, "0.51", "equilibrium flow selecting the throttle g"},
  {"plant.g", ValueType::number, "", "throttle parameter (overrides plant.flow)"},
  {"plant.phi0", ValueType::number, "", "initial flow (default: equilibrium + perturbation)"},
  {"plant.psi0", ValueType::number, "", "initial pressure (default: equilibrium + perturbation)"},
  {"plant.perturb_phi", ValueType::number, "0.01", "flow offset from equilibrium at t = 0"},
  {"plant.perturb_psi", ValueType::number, "0.01", "pressure offset from equilibrium at t = 0"},

  {"scan.lo", ValueType::number, "0.1", "stability scan: first flow"},
  {"scan.hi", ValueType::number, "0.79", "stability scan: last flow"},
  {"scan.n", ValueType::integer, "1000", "stability scan: number of rows"},

  {"integration.dt", ValueType::number, "", "step (default 0.01 plant runs, 0.001 loop and tune runs)"},
  {"integration.t_end", ValueType::number, "", "horizon (default 100 plant runs, 60 loop runs, 30 tune runs)"},
  {"integration.decimate", ValueType::integer, "1", "keep every n-th row in written CSV/SVG"},

  {"steady.window", ValueType::number, "5", "trailing window for steady-state detection"},
  {"steady.tol", ValueType::number, "0.001", "peak-to-peak tolerance inside the window"},

  {"limit_cycle.settle", ValueType::number, "0.5", "fraction of the run discarded as transient"},
  {"limit_cycle.tol", ValueType::number, "0.01", "relative agreement of the last three cycle amplitudes"},

  {"field.n", ValueType::integer, "0", "vector-field grid size written next to plant runs (0 = none)"},

  {"tune.L", ValueType::number, "", "dead time L of the reaction curve"},
  {"tune.T", ValueType::number, "", "time constant T of the reaction curve"},
  {"tune.rule", ValueType::text, "PID", "P | PI | PID"},
  {"tune.lags", ValueType::text, "", "comma-separated lag time constants to simulate and tangent-fit"},

  {"controller.kind", ValueType::text, "adaptive", "fixed-pd | fixed-pid | adaptive"},
  {"controller.kp", ValueType::number, "10", "proportional gain (fixed kinds)"},
  {"controller.ki", ValueType::number, "0", "integral gain (fixed-pid)"},
  {"controller.kd", ValueType::number, "0.7", "derivative gain on the measurement (fixed kinds)"},
  {"controller.k1", ValueType::number, "10", "initial adaptive reference gain"},
  {"controller.k2", ValueType::number, "10", "initial adaptive feedback gain"},
  {"controller.k3", ValueType::number, "0.7", "initial adaptive derivative gain"},
  {"controller.gamma", ValueType::number, "1", "MIT-rule adaptation gain"},
  {"controller.reference", ValueType::number, "0.55", "inlet flow set point"},

  {"valve.tau", ValueType::number, "2", "valve lag time constant [s]"},
  {"valve.min", ValueType::number, "0.05", "minimum recycle flow"},
  {"valve.max", ValueType::number, "0.25", "maximum recycle flow"},
  {"valve.initial", ValueType::number, "", "valve lag output at t = 0 (default valve.min)"},

  {"disturbance.target", ValueType::number, "0.35", "upstream flow level approached"},
  {"disturbance.tau", ValueType::number, "1", "disturbance time constant [s]"},
  {"disturbance.initial", ValueType::number, "0.5", "upstream flow at t = 0"},

  {"reference_model.wn2", ValueType::number, "25", "omega_n^2 of the reference model"},
  {"reference_model.damping", ValueType::number, "8.5", "2 zeta omega_n of the reference model"},

  {"loop.observe_compressor", ValueType::boolean, "false", "append phi, psi of a surge model driven by y"},
  {"loop.surge_flow", ValueType::number, "0.43", "inlet flow below which excursions are flagged"},
  {"loop.compare_adaptive", ValueType::boolean, "false", "also run the adaptive law with identical settings"},

  {"averaging.k1_lo", ValueType::number, "0.1", "grid: smallest k1"},
  {"averaging.k1_hi", ValueType::number, "50", "grid: largest k1"},
  {"averaging.k2_lo", ValueType::number, "0.1", "grid: smallest k2"},
  {"averaging.k2_hi", ValueType::number, "50", "grid: largest k2"},
  {"averaging.n", ValueType::integer, "10", "grid points per axis"},
  {"averaging.k3", ValueType::number, "0.7", "k3 at every grid point"},
  {"averaging.gamma", ValueType::number, "1", "adaptation gain"},
  {"averaging.r", ValueType::number, "0.55", "reference value"},
  {"averaging.mode", ValueType::text, "linear", "linear | saturated actuator"},

  {"output.csv", ValueType::text, "", "CSV file name (default <name>.csv)"},
  {"output.svg", ValueType::boolean, "true", "write SVG figures next to the CSV"},
};
// clang-format on

const KeySpec* find_key(std::string_view key) {
  for (const auto& k : kKeys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  return std::nullopt;
}

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) + ": " : std::string(); }

[[noreturn]] void bad(std::string_view key, const std::string& why) {
  throw ConfigError(std::string(key) + ": " + why, std::string(key));
}

double positive(const Scenario& s, std::string_view key) {
  const double v = s.number(key);
  if (!(v > 0.0)) bad(key, "must be > 0 (got " + std::to_string(v) + ")");
  return v;
}

double nonnegative(const Scenario& s, std::string_view key) {
  const double v = s.number(key);
  if (v < 0.0) bad(key, "must be >= 0 (got " + std::to_string(v) + ")");
  return v;
}

bool plant_kind(ScenarioKind k) { return k == ScenarioKind::simulate || k == ScenarioKind::limit_cycle; }

std::vector<double> parse_lags(const Scenario& s) {
  std::vector<double> out;
  std::stringstream ss(s.text("tune.lags"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_double(trim(item));
    if (!v || !(*v > 0.0)) bad("tune.lags", "expected comma-separated positive numbers");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::map: return "map";
    case ScenarioKind::stability: return "stability";
    case ScenarioKind::simulate: return "simulate";
    case ScenarioKind::limit_cycle: return "limit-cycle";
    case ScenarioKind::tune: return "tune";
    case ScenarioKind::closedloop: return "closedloop";
    case ScenarioKind::averaging: return "averaging";
  }
  return "closedloop";
}

ScenarioKind parse_scenario_kind(std::string_view text) {
  for (auto k : {ScenarioKind::map, ScenarioKind::stability, ScenarioKind::simulate, ScenarioKind::limit_cycle,
                 ScenarioKind::tune, ScenarioKind::closedloop, ScenarioKind::averaging}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("kind: unknown scenario kind '" + std::string(text) + "'", "kind");
}

std::span<const KeySpec> scenario_keys() { return kKeys; }

Scenario::Scenario() = default;

ScenarioKind Scenario::kind() const { return parse_scenario_kind(text("kind")); }

void Scenario::set(std::string_view key, std::string_view value, int line) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError(where(line) + "unknown key '" + std::string(key) + "'", std::string(key), line);
  const std::string v = trim(value);
  bool ok = true;
  switch (spec->type) {
    case ValueType::number: ok = parse_double(v).has_value(); break;
    case ValueType::integer: ok = parse_int(v).has_value(); break;
    case ValueType::boolean: ok = parse_bool(v).has_value(); break;
    case ValueType::text: ok = true; break;
  }
  if (!ok) {
    throw ConfigError(where(line) + std::string(key) + ": cannot parse '" + v + "'", std::string(key), line);
  }
  if (key == "kind") {
    try {
      parse_scenario_kind(v);
    } catch (const ConfigError&) {
      throw ConfigError(where(line) + "kind: unknown scenario kind '" + v + "'", "kind", line);
    }
  }
  values_[std::string(key)] = v;
}

bool Scenario::is_set(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string Scenario::raw(std::string_view key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown key '" + std::string(key) + "'", std::string(key));
  return std::string(spec->default_value);
}

double Scenario::number(std::string_view key) const {
  const auto v = optional_number(key);
  if (!v) throw ConfigError(std::string(key) + ": required but not set", std::string(key));
  return *v;
}

std::optional<double> Scenario::optional_number(std::string_view key) const {
  const std::string r = raw(key);
  if (r.empty()) return std::nullopt;
  const auto v = parse_double(r);
  if (!v) throw ConfigError(std::string(key) + ": not a number", std::string(key));
  return v;
}

long long Scenario::integer(std::string_view key) const {
  const auto v = parse_int(raw(key));
  if (!v) throw ConfigError(std::string(key) + ": not an integer", std::string(key));
  return *v;
}

bool Scenario::flag(std::string_view key) const {
  const auto v = parse_bool(raw(key));
  if (!v) throw ConfigError(std::string(key) + ": not a boolean", std::string(key));
  return *v;
}

std::string Scenario::text(std::string_view key) const { return raw(key); }

Scenario parse_scenario(std::string_view text, std::string_view origin) {
  Scenario s;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line_view = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string line(line_view);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(std::string(origin) + ": line " + std::to_string(line_no) + ": malformed section header",
                          {}, line_no);
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ": line " + std::to_string(line_no) + ": expected 'key = value'", {},
                        line_no);
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ": line " + std::to_string(line_no) + ": empty key", {}, line_no);
    }
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      s.set(full, value, line_no);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ": " + e.what(), e.key(), line_no);
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

std::filesystem::path scenario_catalog_dir() {
  if (const char* env = std::getenv("SURGEKIT_SCENARIO_DIR"); env && *env) return env;
  return SURGEKIT_SCENARIO_DIR;
}

std::filesystem::path find_scenario(std::string_view name_or_path) {
  const std::filesystem::path direct(name_or_path);
  if (std::filesystem::is_regular_file(direct)) return direct;
  const auto dir = scenario_catalog_dir();
  for (const auto& candidate : {dir / std::string(name_or_path), dir / (std::string(name_or_path) + ".scn")}) {
    if (std::filesystem::is_regular_file(candidate)) return candidate;
  }
  throw ConfigError("no scenario file or catalog entry named '" + std::string(name_or_path) + "' (catalog: " +
                    dir.string() + ")");
}

CompressorMap map_from(const Scenario& s) {
  CompressorMap m;
  m.psi0 = s.number("map.psi0");
  m.h = s.number("map.h");
  m.slope = s.number("map.slope");
  m.offset = s.number("map.offset");
  m.bracket = {s.number("map.c0"), s.number("map.c1"), s.number("map.c2"), s.number("map.c3")};
  m.domain_lo = s.number("map.lo");
  m.domain_hi = s.number("map.hi");
  if (!(m.domain_lo < m.domain_hi)) bad("map.hi", "must exceed map.lo");
  return m;
}

GreitzerParams greitzer_from(const Scenario& s) {
  GreitzerParams p;
  p.a = positive(s, "greitzer.a");
  p.b = positive(s, "greitzer.b");
  p.g = 1.0;
  return p;
}

IntegrationSettings integration_from(const Scenario& s) {
  IntegrationSettings is;
  const ScenarioKind k = s.kind();
  const bool plant = plant_kind(k);
  is.dt = s.optional_number("integration.dt").value_or(plant ? 1e-2 : 1e-3);
  is.t_end = s.optional_number("integration.t_end")
                 .value_or(plant ? 100.0 : (k == ScenarioKind::tune ? 30.0 : 60.0));
  if (!(is.dt > 0.0)) bad("integration.dt", "must be > 0");
  if (!(is.t_end > 0.0)) bad("integration.t_end", "must be > 0");
  if (is.t_end < is.dt) bad("integration.t_end", "must be at least one step long");
  const long long dec = s.integer("integration.decimate");
  if (dec < 1) bad("integration.decimate", "must be >= 1");
  is.decimate = static_cast<std::size_t>(dec);
  return is;
}

PlantRun plant_run_from(const Scenario& s) {
  const CompressorMap map = map_from(s);
  PlantRun run;
  run.params = greitzer_from(s);
  if (const auto g = s.optional_number("plant.g")) {
    if (!(*g > 0.0)) bad("plant.g", "must be > 0");
    run.params.g = *g;
  } else {
    const double flow = s.number("plant.flow");
    if (!(flow > map.domain_lo) || !(flow < map.domain_hi)) bad("plant.flow", "must lie inside the map's flow domain");
    try {
      run.params.g = throttle_from_flow(map, flow);
    } catch (const DomainError& e) {
      bad("plant.flow", e.what());
    }
  }
  try {
    run.equilibrium = equilibrium_from_throttle(map, run.params.g);
  } catch (const Error& e) {
    bad(s.is_set("plant.g") ? "plant.g" : "plant.flow", e.what());
  }
  const auto phi0 = s.optional_number("plant.phi0");
  const auto psi0 = s.optional_number("plant.psi0");
  if (phi0.has_value() != psi0.has_value()) bad(phi0 ? "plant.psi0" : "plant.phi0", "set plant.phi0 and plant.psi0 together");
  if (phi0) {
    run.initial = {*phi0, *psi0};
  } else {
    run.initial = {run.equilibrium.phi + s.number("plant.perturb_phi"),
                   run.equilibrium.psi + s.number("plant.perturb_psi")};
  }
  if (!(run.initial.psi > 0.0)) bad(psi0 ? "plant.psi0" : "plant.perturb_psi", "initial pressure must be > 0");
  return run;
}

ClosedLoopScenario closed_loop_from(const Scenario& s) {
  ClosedLoopScenario c;
  c.name = s.name();
  try {
    c.controller.kind = parse_controller_kind(s.text("controller.kind"));
  } catch (const DomainError& e) {
    bad("controller.kind", e.what());
  }
  c.controller.kp = nonnegative(s, "controller.kp");
  c.controller.ki = nonnegative(s, "controller.ki");
  c.controller.kd = nonnegative(s, "controller.kd");
  c.controller.k1 = nonnegative(s, "controller.k1");
  c.controller.k2 = nonnegative(s, "controller.k2");
  c.controller.k3 = nonnegative(s, "controller.k3");
  c.controller.gamma = s.number("controller.gamma");
  if (c.controller.kind == ControllerKind::adaptive && !(c.controller.gamma > 0.0)) {
    bad("controller.gamma", "must be > 0 for the adaptive controller");
  }
  c.controller.reference = s.number("controller.reference");

  c.valve.tau = positive(s, "valve.tau");
  c.valve.out_min = positive(s, "valve.min");
  c.valve.out_max = s.number("valve.max");
  if (!(c.valve.out_max > c.valve.out_min)) bad("valve.max", "must exceed valve.min");
  c.valve_initial = s.optional_number("valve.initial");

  c.disturbance.target = nonnegative(s, "disturbance.target");
  c.disturbance.tau = positive(s, "disturbance.tau");
  c.disturbance.initial = s.number("disturbance.initial");

  c.reference_model.omega_n_sq = positive(s, "reference_model.wn2");
  c.reference_model.two_zeta_omega_n = positive(s, "reference_model.damping");

  const IntegrationSettings is = integration_from(s);
  c.dt = is.dt;
  c.t_end = is.t_end;

  c.observe_compressor = s.flag("loop.observe_compressor");
  if (c.observe_compressor) {
    c.map = map_from(s);
    c.greitzer = greitzer_from(s);
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

AveragedPoint averaged_base_from(const Scenario& s) {
  AveragedPoint p;
  p.k3 = nonnegative(s, "averaging.k3");
  p.gamma = positive(s, "averaging.gamma");
  p.r = s.number("averaging.r");
  const std::string mode = s.text("averaging.mode");
  if (mode == "linear") {
    p.mode = ActuatorMode::linear;
  } else if (mode == "saturated") {
    p.mode = ActuatorMode::saturated;
  } else {
    bad("averaging.mode", "expected linear or saturated");
  }
  return p;
}

void validate_scenario(const Scenario& s) {
  const ScenarioKind kind = s.kind();
  if (s.name().empty()) bad("name", "must not be empty");
  s.flag("output.svg");
  switch (kind) {
    case ScenarioKind::map: {
      const CompressorMap m = map_from(s);
      if (s.integer("table.n") < 2) bad("table.n", "must be >= 2");
      const double lo = s.number("table.lo"), hi = s.number("table.hi");
      if (!(lo < hi)) bad("table.hi", "must exceed table.lo");
      (void)m;
      break;
    }
    case ScenarioKind::stability: {
      const CompressorMap m = map_from(s);
      greitzer_from(s);
      const double lo = s.number("scan.lo"), hi = s.number("scan.hi");
      if (!(lo > m.domain_lo)) bad("scan.lo", "must lie above map.lo");
      if (!(hi < m.domain_hi)) bad("scan.hi", "must lie below map.hi");
      if (!(lo < hi)) bad("scan.hi", "must exceed scan.lo");
      if (s.integer("scan.n") < 2) bad("scan.n", "must be >= 2");
      break;
    }
    case ScenarioKind::simulate:
    case ScenarioKind::limit_cycle: {
      plant_run_from(s);
      integration_from(s);
      positive(s, "steady.window");
      positive(s, "steady.tol");
      if (s.integer("field.n") < 0) bad("field.n", "must be >= 0");
      const double settle = s.number("limit_cycle.settle");
      if (!(settle > 0.0 && settle < 1.0)) bad("limit_cycle.settle", "must lie in (0, 1)");
      positive(s, "limit_cycle.tol");
      break;
    }
    case ScenarioKind::tune: {
      try {
        parse_zn_rule(s.text("tune.rule"));
      } catch (const DomainError& e) {
        bad("tune.rule", e.what());
      }
      const bool has_lt = s.is_set("tune.L") || s.is_set("tune.T");
      if (has_lt) {
        positive(s, "tune.L");
        positive(s, "tune.T");
      }
      const auto lags = parse_lags(s);
      if (!has_lt && lags.empty()) bad("tune.L", "set tune.L and tune.T, or tune.lags");
      if (!lags.empty()) integration_from(s);
      break;
    }
    case ScenarioKind::closedloop: {
      closed_loop_from(s);
      s.number("loop.surge_flow");
      s.flag("loop.compare_adaptive");
      break;
    }
    case ScenarioKind::averaging: {
      averaged_base_from(s);
      const double k1_lo = nonnegative(s, "averaging.k1_lo"), k1_hi = nonnegative(s, "averaging.k1_hi");
      const double k2_lo = nonnegative(s, "averaging.k2_lo"), k2_hi = nonnegative(s, "averaging.k2_hi");
      if (!(k1_lo <= k1_hi)) bad("averaging.k1_hi", "must be >= averaging.k1_lo");
      if (!(k2_lo <= k2_hi)) bad("averaging.k2_hi", "must be >= averaging.k2_lo");
      if (s.integer("averaging.n") < 1) bad("averaging.n", "must be >= 1");
      break;
    }
  }
}

std::vector<double> tune_lags(const Scenario& s) { return parse_lags(s); }

}  // namespace surgekit
