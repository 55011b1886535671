#include "surgekit/control.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "parallel.hpp"

namespace surgekit {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// u = A - D y' split of the configured law.
struct LawParts {
  double proportional = 0.0;  // A
  double derivative = 0.0;    // D
};

LawParts law_parts(const ControllerConfig& cfg, double r, double y, double e_int, double k1,
                   double k2, double k3) {
  switch (cfg.kind) {
    case ControllerKind::fixed_pd:
      return {cfg.kp * (r - y), cfg.kd};
    case ControllerKind::fixed_pid:
      return {cfg.kp * (r - y) + cfg.ki * e_int, cfg.kd};
    case ControllerKind::adaptive:
      return {k1 * r - k2 * y, k3};
  }
  return {};
}

}  // namespace

void ValveModel::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("valve.tau must be positive");
  if (!(out_min > 0.0) || !(out_min < out_max) || !std::isfinite(out_max)) {
    throw DomainError("valve limits must satisfy 0 < out_min < out_max");
  }
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::fixed_pd:
      return "fixed-pd";
    case ControllerKind::fixed_pid:
      return "fixed-pid";
    case ControllerKind::adaptive:
      return "adaptive";
  }
  return "adaptive";
}

ControllerKind parse_controller_kind(std::string_view text) {
  if (text == "fixed-pd") return ControllerKind::fixed_pd;
  if (text == "fixed-pid") return ControllerKind::fixed_pid;
  if (text == "adaptive") return ControllerKind::adaptive;
  throw DomainError("unknown controller kind '" + std::string(text) +
                    "' (expected fixed-pd, fixed-pid or adaptive)");
}

void ControllerConfig::validate() const {
  for (double g : {kp, ki, kd, k1, k2, k3}) {
    if (!finite_nonneg(g)) throw DomainError("controller gains must be finite and >= 0");
  }
  if (kind == ControllerKind::adaptive && !(gamma > 0.0 && std::isfinite(gamma))) {
    throw DomainError("adaptation gain gamma must be positive");
  }
  if (!std::isfinite(reference)) throw DomainError("reference must be finite");
}

void DisturbanceProfile::validate() const {
  if (!finite_nonneg(target)) throw DomainError("disturbance target must be >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("disturbance tau must be positive");
  if (!std::isfinite(initial)) throw DomainError("disturbance initial value must be finite");
}

std::array<double, LoopState::kSize> LoopState::to_array() const {
  return {x, d, ym1, ym2, v1, v2, v3, k1, k2, k3, e_int};
}

LoopState LoopState::from_array(std::span<const double> s) {
  if (s.size() < kSize) throw DomainError("loop state needs 11 entries");
  return {s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8], s[9], s[10]};
}

double valve_rhs(double x, double u, const ValveModel& valve) { return (u - x) / valve.tau; }

double saturate(double x, const ValveModel& valve) {
  if (x >= valve.out_max) return valve.out_max;
  if (x <= valve.out_min) return valve.out_min;
  return x;
}

double plant_output(double d, double co) { return d + co; }

double disturbance_rhs(double d, const DisturbanceProfile& profile) {
  return (profile.target - d) / profile.tau;
}

double control_signal(double r, double y, double y_dot, const ControllerConfig& cfg, double e_int) {
  const LawParts p = law_parts(cfg, r, y, e_int, cfg.k1, cfg.k2, cfg.k3);
  return p.proportional - p.derivative * y_dot;
}

std::array<double, 2> reference_model_rhs(double ym1, double ym2, double r, const ReferenceModel& m) {
  return {ym2, m.omega_n_sq * r - m.omega_n_sq * ym1 - m.two_zeta_omega_n * ym2};
}

std::array<double, 3> sensitivity_rhs(double v1, double v2, double v3, double r, double y, double y_dot,
                                      double filter_tau) {
  return {(r - v1) / filter_tau, (-y - v2) / filter_tau, (-y_dot - v3) / filter_tau};
}

std::array<double, 3> mras_update(double e, double v1, double v2, double v3, double gamma,
                                  bool in_linear_mode) {
  if (!in_linear_mode) return {0.0, 0.0, 0.0};
  return {-gamma * e * v1, -gamma * e * v2, -gamma * e * v3};
}

double resolve_control_signal(double r, double y, const ControllerConfig& cfg, const LoopState& state,
                              double d_dot, const ValveModel& valve) {
  const LawParts p = law_parts(cfg, r, y, state.e_int, state.k1, state.k2, state.k3);
  if (!valve.in_linear_mode(state.x)) {
    return p.proportional - p.derivative * d_dot;
  }
  const double denom = 1.0 + p.derivative / valve.tau;
  assert(denom > 0.0);
  return (p.proportional - p.derivative * d_dot + p.derivative * state.x / valve.tau) / denom;
}

std::string_view to_string(ZnRule rule) {
  switch (rule) {
    case ZnRule::P:
      return "P";
    case ZnRule::PI:
      return "PI";
    case ZnRule::PID:
      return "PID";
  }
  return "PID";
}

ZnRule parse_zn_rule(std::string_view text) {
  if (text == "P") return ZnRule::P;
  if (text == "PI") return ZnRule::PI;
  if (text == "PID") return ZnRule::PID;
  throw DomainError("unknown tuning rule '" + std::string(text) + "' (expected P, PI or PID)");
}

ZnGains zn_gains(double dead_time, double time_constant, ZnRule rule) {
  if (!(dead_time > 0.0) || !(time_constant > 0.0) || !std::isfinite(dead_time) ||
      !std::isfinite(time_constant)) {
    throw DomainError("Ziegler-Nichols tuning needs L > 0 and T > 0");
  }
  const double ratio = time_constant / dead_time;
  ZnGains g;
  switch (rule) {
    case ZnRule::P:
      g.kp = ratio;
      break;
    case ZnRule::PI:
      g.kp = 0.9 * ratio;
      g.ti = dead_time / 0.3;
      break;
    case ZnRule::PID:
      g.kp = 1.2 * ratio;
      g.ti = 2.0 * dead_time;
      g.td = 0.5 * dead_time;
      break;
  }
  g.ki = g.ti ? g.kp / *g.ti : 0.0;
  g.kd = g.kp * g.td;
  return g;
}

ReactionCurve extract_LT(const Trajectory& step_response, std::string_view column) {
  const auto y = step_response.column(column);
  if (y.size() < 3) throw DegenerateResponseError("step response needs at least 3 samples");
  const double dt = step_response.dt();
  const double y0 = y.front();
  const double rise = y.back() - y0;
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v - y0));
  if (!(std::abs(rise) > 1e-12 * std::max(1.0, std::abs(y0))) || scale == 0.0) {
    throw DegenerateResponseError("flat step response: no rise to tangent on");
  }
  const double sign = rise > 0.0 ? 1.0 : -1.0;

  // Steepest segment, evaluated at its midpoint.
  std::size_t best = 0;
  double best_slope = -1.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const double s = sign * (y[i + 1] - y[i]) / dt;
    if (s > best_slope) {
      best_slope = s;
      best = i;
    }
  }
  if (!(best_slope > 0.0)) throw DegenerateResponseError("step response never moves toward its final value");

  const double t_mid = (static_cast<double>(best) + 0.5) * dt;
  const double y_mid = sign * (0.5 * (y[best] + y[best + 1]) - y0);
  const double intercept = t_mid - y_mid / best_slope;
  return {std::max(0.0, intercept), std::abs(rise) / best_slope};
}

Trajectory lag_cascade_step_response(std::span<const double> taus, double dt, double t_end,
                                     double amplitude) {
  if (taus.empty()) throw DomainError("lag cascade needs at least one time constant");
  for (double tau : taus) {
    if (!(tau > 0.0)) throw DomainError("lag time constants must be positive");
  }
  std::vector<double> tc(taus.begin(), taus.end());
  SystemDescriptor sys;
  sys.dimension = tc.size();
  sys.output_names = {"y"};
  sys.rhs = [tc, amplitude](double, std::span<const double> x, std::span<double> dx) {
    double input = amplitude;
    for (std::size_t i = 0; i < tc.size(); ++i) {
      dx[i] = (input - x[i]) / tc[i];
      input = x[i];
    }
  };
  sys.observe = [](double, std::span<const double> x, std::span<double> out) { out[0] = x.back(); };
  const std::vector<double> zero(tc.size(), 0.0);
  return integrate(sys, zero, dt, t_end);
}

void ClosedLoopScenario::validate() const {
  controller.validate();
  valve.validate();
  disturbance.validate();
  if (!(reference_model.omega_n_sq > 0.0) || !(reference_model.two_zeta_omega_n > 0.0)) {
    throw DomainError("reference model coefficients must be positive");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");
  if (t_end < dt) throw DomainError("t_end must cover at least one step");
  if (valve_initial && !std::isfinite(*valve_initial)) throw DomainError("valve initial value must be finite");
  if (initial) {
    for (double v : initial->to_array()) {
      if (!std::isfinite(v)) throw DomainError("initial loop state must be finite");
    }
    if (initial->k1 < 0.0 || initial->k2 < 0.0 || initial->k3 < 0.0) {
      throw DomainError("initial adaptive parameters must be >= 0");
    }
  }
  if (observe_compressor) {
    map.validate();
    GreitzerParams p = greitzer;
    p.g = 1.0;  // g is driven by the loop
    p.validate();
  }
}

LoopState default_initial_state(const ClosedLoopScenario& s) {
  if (s.initial) return *s.initial;
  LoopState st;
  st.x = s.valve_initial.value_or(s.valve.out_min);
  st.d = s.disturbance.initial;
  const double y0 = plant_output(st.d, saturate(st.x, s.valve));
  const double r = s.controller.reference;
  st.ym1 = r;
  st.ym2 = 0.0;
  st.v1 = r;
  st.v2 = -y0;
  st.v3 = 0.0;
  st.k1 = s.controller.k1;
  st.k2 = s.controller.k2;
  st.k3 = s.controller.k3;
  st.e_int = 0.0;
  return st;
}

LoopSignals evaluate_loop(const ClosedLoopScenario& s, const LoopState& st) {
  LoopSignals sig;
  const double r = s.controller.reference;
  sig.d = st.d;
  sig.d_dot = disturbance_rhs(st.d, s.disturbance);
  sig.x = st.x;
  sig.linear = s.valve.in_linear_mode(st.x);
  sig.co = saturate(st.x, s.valve);
  sig.y = plant_output(sig.d, sig.co);
  sig.u = resolve_control_signal(r, sig.y, s.controller, st, sig.d_dot, s.valve);
  sig.y_dot = sig.d_dot + (sig.linear ? valve_rhs(st.x, sig.u, s.valve) : 0.0);
  sig.ym = st.ym1;
  sig.e = sig.y - sig.ym;
  return sig;
}

LoopState loop_rhs(const ClosedLoopScenario& s, const LoopState& st) {
  const LoopSignals sig = evaluate_loop(s, st);
  const double r = s.controller.reference;
  LoopState dx;
  dx.x = valve_rhs(st.x, sig.u, s.valve);
  dx.d = sig.d_dot;
  const auto ref = reference_model_rhs(st.ym1, st.ym2, r, s.reference_model);
  dx.ym1 = ref[0];
  dx.ym2 = ref[1];
  const auto sens = sensitivity_rhs(st.v1, st.v2, st.v3, r, sig.y, sig.y_dot, s.valve.tau);
  dx.v1 = sens[0];
  dx.v2 = sens[1];
  dx.v3 = sens[2];
  if (s.controller.kind == ControllerKind::adaptive) {
    const auto dk = mras_update(sig.e, st.v1, st.v2, st.v3, s.controller.gamma, sig.linear);
    dx.k1 = dk[0];
    dx.k2 = dk[1];
    dx.k3 = dk[2];
  }
  dx.e_int = s.controller.kind == ControllerKind::fixed_pid ? r - sig.y : 0.0;
  return dx;
}

std::vector<std::string> closed_loop_columns(bool observe_compressor) {
  std::vector<std::string> cols = {"d", "u", "x", "co", "y", "ym", "e", "k1", "k2", "k3"};
  if (observe_compressor) {
    cols.emplace_back("phi");
    cols.emplace_back("psi");
  }
  return cols;
}

Trajectory simulate_closed_loop(const ClosedLoopScenario& scenario) {
  scenario.validate();
  const ClosedLoopScenario s = scenario;
  const bool observe = s.observe_compressor;

  SystemDescriptor sys;
  sys.dimension = LoopState::kSize + (observe ? 2 : 0);
  sys.output_names = closed_loop_columns(observe);
  sys.rhs = [s, observe](double, std::span<const double> x, std::span<double> dx) {
    const LoopState st = LoopState::from_array(x);
    const auto d = loop_rhs(s, st).to_array();
    std::copy(d.begin(), d.end(), dx.begin());
    if (observe) {
      // Measured inlet flow sets the throttle parameter of the observed plant.
      const double y = evaluate_loop(s, st).y;
      GreitzerParams p = s.greitzer;
      p.g = throttle_from_flow(s.map, y);
      const PlantState ds = greitzer_rhs({x[LoopState::kSize], x[LoopState::kSize + 1]}, p, s.map);
      dx[LoopState::kSize] = ds.phi;
      dx[LoopState::kSize + 1] = ds.psi;
    }
  };
  sys.observe = [s, observe](double, std::span<const double> x, std::span<double> out) {
    const LoopState st = LoopState::from_array(x);
    const LoopSignals sig = evaluate_loop(s, st);
    out[0] = sig.d;
    out[1] = sig.u;
    out[2] = sig.x;
    out[3] = sig.co;
    out[4] = sig.y;
    out[5] = sig.ym;
    out[6] = sig.e;
    out[7] = st.k1;
    out[8] = st.k2;
    out[9] = st.k3;
    if (observe) {
      out[10] = x[LoopState::kSize];
      out[11] = x[LoopState::kSize + 1];
    }
  };
  if (s.controller.kind == ControllerKind::adaptive) {
    // Adaptive gains are kept non-negative.
    sys.constrain = [](std::span<double> x) {
      for (std::size_t i = 7; i < 10; ++i) x[i] = std::max(0.0, x[i]);
    };
  }

  const LoopState st0 = default_initial_state(s);
  std::vector<double> x0(sys.dimension);
  const auto a0 = st0.to_array();
  std::copy(a0.begin(), a0.end(), x0.begin());
  if (observe) {
    const double y0 = evaluate_loop(s, st0).y;
    x0[LoopState::kSize] = y0;
    x0[LoopState::kSize + 1] = map_pressure_rise(s.map, y0);
  }
  return integrate(sys, x0, s.dt, s.t_end);
}

std::vector<Trajectory> simulate_batch(std::span<const ClosedLoopScenario> scenarios) {
  for (const auto& s : scenarios) s.validate();
  std::vector<Trajectory> out(scenarios.size());
  detail::parallel_for(scenarios.size(), [&](std::size_t i) { out[i] = simulate_closed_loop(scenarios[i]); });
  return out;
}

namespace serial {

std::vector<Trajectory> simulate_batch(std::span<const ClosedLoopScenario> scenarios) {
  std::vector<Trajectory> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(simulate_closed_loop(s));
  return out;
}

}  // namespace serial

}  // namespace surgekit
