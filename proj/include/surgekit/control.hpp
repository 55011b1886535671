#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgekit/compressor.hpp"
#include "surgekit/ode.hpp"

namespace surgekit {

/// Anti-surge recycle valve: first-order lag 1/(tau s + 1) followed by a hard
/// clamp of the delivered flow to [out_min, out_max].
struct ValveModel {
  double tau = 2.0;
  double out_min = 0.05;
  double out_max = 0.25;

  void validate() const;
  // Inclusive on both ends, matching the middle branch of the clamp.
  bool in_linear_mode(double x) const noexcept { return x >= out_min && x <= out_max; }
};

enum class ControllerKind { fixed_pd, fixed_pid, adaptive };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view text);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::adaptive;
  double kp = 10.0;
  double ki = 0.0;
  double kd = 0.7;
  double k1 = 10.0;
  double k2 = 10.0;
  double k3 = 0.7;
  double gamma = 1.0;
  double reference = 0.55;

  void validate() const;
};

/// Upstream flow entering the compressor inlet: first-order approach from
/// `initial` to `target` with time constant `tau`.
struct DisturbanceProfile {
  double target = 0.35;
  double tau = 1.0;
  double initial = 0.50;

  void validate() const;
};

/// Integrated closed-loop state.
struct LoopState {
  double x = 0.0;      // valve lag output before the clamp
  double d = 0.0;      // disturbance flow
  double ym1 = 0.0;    // reference model output
  double ym2 = 0.0;    // and its derivative
  double v1 = 0.0;     // filtered r
  double v2 = 0.0;     // filtered -y
  double v3 = 0.0;     // filtered -y'
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double e_int = 0.0;  // integral of r - y (fixed-pid)

  static constexpr std::size_t kSize = 11;
  std::array<double, kSize> to_array() const;
  static LoopState from_array(std::span<const double> values);
};

double valve_rhs(double x, double u, const ValveModel& valve);
double saturate(double x, const ValveModel& valve);
double plant_output(double d, double co);
double disturbance_rhs(double d, const DisturbanceProfile& profile);

/// Explicit control law for the configured kind:
///   fixed-pd   Kp (r - y) - Kd y'
///   fixed-pid  Kp (r - y) + Ki e_int - Kd y'
///   adaptive   k1 r - k2 y - k3 y'      (gains taken from cfg.k1..k3)
double control_signal(double r, double y, double y_dot, const ControllerConfig& cfg, double e_int);

struct ReferenceModel {
  double omega_n_sq = 25.0;
  double two_zeta_omega_n = 8.5;
};

/// State-space form of omega_n^2 / (s^2 + 2 zeta omega_n s + omega_n^2).
std::array<double, 2> reference_model_rhs(double ym1, double ym2, double r,
                                          const ReferenceModel& model = {});

/// Each regressor passes through 1/(filter_tau s + 1): inputs r, -y, -y'.
std::array<double, 3> sensitivity_rhs(double v1, double v2, double v3, double r, double y, double y_dot,
                                      double filter_tau = 2.0);

/// MIT-rule gradient step -gamma e v_i; frozen while the valve saturates.
std::array<double, 3> mras_update(double e, double v1, double v2, double v3, double gamma,
                                  bool in_linear_mode);

/// Solves the algebraic loop u <-> y' created by the derivative term.
/// In linear mode y' = d' + (u - x)/tau, so u (1 + D/tau) = A - D d' + D x/tau
/// with D the derivative gain and A the remaining terms; when saturated
/// y' = d' and the law is explicit.
double resolve_control_signal(double r, double y, const ControllerConfig& cfg, const LoopState& state,
                              double d_dot, const ValveModel& valve);

enum class ZnRule { P, PI, PID };

std::string_view to_string(ZnRule rule);
ZnRule parse_zn_rule(std::string_view text);

struct ZnGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  std::optional<double> ti;  // empty means infinite (no integral action)
  double td = 0.0;
};

/// Open-loop (reaction-curve) Ziegler-Nichols table.
ZnGains zn_gains(double dead_time, double time_constant, ZnRule rule);

struct ReactionCurve {
  double dead_time = 0.0;      // L
  double time_constant = 0.0;  // T
};

/// Tangent construction on a step response: the steepest tangent's
/// time-axis intercept (clamped at 0) gives L; the span from there to the
/// tangent reaching the final value gives T.
ReactionCurve extract_LT(const Trajectory& step_response, std::string_view column = "y");

/// Unit-step response (scaled by `amplitude`) of a cascade of first-order
/// lags, recorded in column "y".
Trajectory lag_cascade_step_response(std::span<const double> taus, double dt, double t_end,
                                     double amplitude = 1.0);

struct ClosedLoopScenario {
  std::string name = "default";
  ControllerConfig controller;
  ValveModel valve;
  DisturbanceProfile disturbance;
  ReferenceModel reference_model;
  double dt = 1e-3;
  double t_end = 60.0;
  // Valve lag output at t = 0; defaults to the valve floor.
  std::optional<double> valve_initial;
  // Full override of the starting state (takes precedence over valve_initial).
  std::optional<LoopState> initial;
  // Side-by-side surge-model integration driven by g(t) = y / sqrt(psi_c(y)).
  bool observe_compressor = false;
  CompressorMap map;
  GreitzerParams greitzer;

  void validate() const;
};

/// Starting state: valve at `valve_initial` (floor by default), disturbance at
/// its initial level, reference model and regressor filters at rest on the
/// initial operating point, parameters from the controller config.
LoopState default_initial_state(const ClosedLoopScenario& scenario);

/// Every signal of the loop at one instant, in evaluation order.
struct LoopSignals {
  double d = 0.0;
  double d_dot = 0.0;
  bool linear = true;
  double u = 0.0;
  double x = 0.0;
  double co = 0.0;
  double y = 0.0;
  double y_dot = 0.0;
  double ym = 0.0;
  double e = 0.0;
};

LoopSignals evaluate_loop(const ClosedLoopScenario& scenario, const LoopState& state);

/// d/dt of the loop state (without compressor observation).
LoopState loop_rhs(const ClosedLoopScenario& scenario, const LoopState& state);

std::vector<std::string> closed_loop_columns(bool observe_compressor);

/// Columns t,d,u,x,co,y,ym,e,k1,k2,k3 (+ phi,psi when observing).
Trajectory simulate_closed_loop(const ClosedLoopScenario& scenario);

/// Independent scenarios integrated concurrently (OpenMP).
std::vector<Trajectory> simulate_batch(std::span<const ClosedLoopScenario> scenarios);

namespace serial {
std::vector<Trajectory> simulate_batch(std::span<const ClosedLoopScenario> scenarios);
}  // namespace serial

}  // namespace surgekit
