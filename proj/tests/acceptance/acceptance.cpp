// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance AC05 ...   run the named criteria only
//
// Exit status is nonzero if any selected criterion fails. Oracles here are
// written independently of the library (own map, own Jacobian, Eigen
// eigensolves, closed-form responses) wherever a value is derived.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "surgekit/averaging.hpp"
#include "surgekit/compressor.hpp"
#include "surgekit/control.hpp"
#include "surgekit/ode.hpp"
#include "surgekit/stability.hpp"

using namespace surgekit;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string f(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Map and slope typed in from the cubic, not taken from the library.
double oracle_psi_c(double phi) {
  const double z = 4.0 * phi - 1.0;
  return 0.352 + 0.18 * (1.0 + 1.5 * z - 0.5 * z * z * z);
}
double oracle_slope(double phi) {
  const double z = 4.0 * phi - 1.0;
  return 0.18 * 4.0 * (1.5 - 1.5 * z * z);
}
// Trace of the equilibrium Jacobian with a = 0.8, b = 1.25.
double oracle_trace(double phi) { return 0.8 * oracle_slope(phi) - 1.25 * phi / (2.0 * oracle_psi_c(phi)); }

Verdict ac01() {
  const CompressorMap map;
  const double root = surge_boundary(map);
  // Brute-force sign scan at 1e-4 resolution, from high flow downward.
  double brute = std::nan("");
  for (double phi = 0.79; phi > 0.1; phi -= 1e-4) {
    if (oracle_trace(phi) < 0.0 && oracle_trace(phi - 1e-4) >= 0.0) {
      brute = phi - 0.5e-4;
      break;
    }
  }
  const bool ok = root >= 0.42 && root <= 0.44 && std::abs(root - brute) <= 1e-3;
  return {ok, "phi* = " + f(root, 9) + ", brute-force scan " + f(brute, 6) + ", window [0.42, 0.44]"};
}

Verdict ac02() {
  const CompressorMap map;
  const auto rows = stability_scan(map, 0.01, 0.79, 1000);
  double worst = -std::numeric_limits<double>::infinity();
  double worst_oracle = worst;
  for (const auto& r : rows) {
    worst = std::max(worst, r.discriminant);
    // Independent discriminant from the oracle Jacobian entries.
    const double j11 = 0.8 * oracle_slope(r.phi), j12 = -0.8;
    const double j21 = 1.25, j22 = -1.25 * r.phi / (2.0 * oracle_psi_c(r.phi));
    const double tr = j11 + j22, det = j11 * j22 - j12 * j21;
    worst_oracle = std::max(worst_oracle, tr * tr - 4.0 * det);
  }
  const bool ok = rows.size() == 1000 && worst < 0.0 && worst_oracle < 0.0;
  return {ok, "max delta over 1000 points = " + f(worst) + " (oracle " + f(worst_oracle) + ")"};
}

Verdict ac03() {
  const CompressorMap map;
  GreitzerParams p;
  p.g = throttle_from_flow(map, 0.51);
  const std::vector<double> x0{0.63, 0.62};
  const Trajectory traj = integrate(greitzer_system(map, p), x0, 1e-2, 50.0);
  const auto ss = steady_state_of(traj, 5.0, 1e-3);
  if (!ss) return {false, "no steady state within tol 1e-3"};
  const bool ok = std::abs((*ss)[0] - 0.51) <= 0.01 && std::abs((*ss)[1] - 0.71) <= 0.01;
  return {ok, "g = " + f(p.g) + ", steady state (" + f((*ss)[0]) + ", " + f((*ss)[1]) + ")"};
}

Verdict ac04() {
  const double v = map_pressure_rise(CompressorMap{}, 0.4);
  return {std::abs(v - 0.6746) <= 1e-3, "psi_c(0.4) = " + f(v, 9)};
}

LimitCycleReport limit_cycle_run(double dt) {
  const CompressorMap map;
  GreitzerParams p;
  p.g = throttle_from_flow(map, 0.4);
  const PlantState eq = equilibrium_from_throttle(map, p.g);
  const std::vector<double> x0{eq.phi + 0.01, eq.psi + 0.01};
  return detect_limit_cycle(integrate(greitzer_system(map, p), x0, dt, 100.0));
}

Verdict ac05() {
  const auto a = limit_cycle_run(1e-2);
  const auto b = limit_cycle_run(5e-3);
  const double dphi = std::abs(a.amplitude_phi - b.amplitude_phi) / a.amplitude_phi;
  const double dpsi = std::abs(a.amplitude_psi - b.amplitude_psi) / a.amplitude_psi;
  const bool ok = a.detected && b.detected && a.amplitude_spread <= 0.01 && dphi <= 0.02 && dpsi <= 0.02;
  return {ok, "amplitude phi " + f(a.amplitude_phi) + " / " + f(b.amplitude_phi) + ", psi " + f(a.amplitude_psi) +
                  " / " + f(b.amplitude_psi) + " (dt 1e-2 / 5e-3), spread " + f(a.amplitude_spread) + ", period " +
                  f(a.period)};
}

Verdict ac06() {
  const CompressorMap map;
  const auto rows = stability_scan(map, 0.1, 0.79, 1000);
  double worst = 0.0;
  int changes = 0;
  double where = std::nan("");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i].bendixson_r - 2.0 * rows[i].real_part));
    if (i > 0 && (rows[i].bendixson_r > 0.0) != (rows[i - 1].bendixson_r > 0.0)) {
      ++changes;
      where = 0.5 * (rows[i].phi + rows[i - 1].phi);
    }
  }
  const double boundary = surge_boundary(map);
  const bool ok = worst <= 1e-12 && changes == 1 && std::abs(where - boundary) <= 1e-3;
  return {ok, "max |R - 2 Re| = " + f(worst) + ", sign changes " + std::to_string(changes) + " at " + f(where) +
                  " vs boundary " + f(boundary)};
}

Verdict ac07() {
  const ZnGains z = zn_gains(0.213, 1.79, ZnRule::PID);
  const bool ok = std::abs(z.kp - 10.08) <= 0.01 * 10.08 && std::abs(z.kd - 1.065) <= 0.01 * 1.065 &&
                  std::abs(z.ki - 23.66) <= 0.02 * 23.66;
  return {ok, "Kp = " + f(z.kp) + ", Ki = " + f(z.ki) + ", Kd = " + f(z.kd)};
}

ClosedLoopScenario adaptive(double target) {
  ClosedLoopScenario c;
  c.name = "d" + f(target);
  c.disturbance.target = target;
  return c;
}

double max_k_excursion(const Trajectory& t) {
  double m = 0.0;
  for (const char* col : {"k1", "k2", "k3"}) {
    const auto k = t.column(col);
    for (double v : k) m = std::max(m, std::abs(v - k.front()));
  }
  return m;
}

double final_of(const Trajectory& t, const char* col) { return t.at(t.size() - 1, t.column_index(col)); }

Verdict ac08() {
  const ClosedLoopScenario c = adaptive(0.35);
  const Trajectory t = simulate_closed_loop(c);
  const auto co = t.column("co");
  const auto [lo, hi] = std::minmax_element(co.begin(), co.end());
  const double y = final_of(t, "y"), moved = max_k_excursion(t);
  const bool ok = std::abs(y - 0.55) <= 0.01 && *lo >= 0.05 && *hi <= 0.25 && moved > 0.0;
  return {ok, "gamma = " + f(c.controller.gamma) + ", final y = " + f(y) + ", co in [" + f(*lo) + ", " + f(*hi) +
                  "], max |dk| = " + f(moved)};
}

Verdict ac09() {
  const Trajectory strong = simulate_closed_loop(adaptive(0.35));
  const Trajectory mild = simulate_closed_loop(adaptive(0.45));
  const double y = final_of(mild, "y");
  const double m35 = max_k_excursion(strong), m45 = max_k_excursion(mild);
  const bool ok = std::abs(y - 0.55) <= 0.01 && m45 < m35;
  return {ok, "gamma = 1, final y = " + f(y) + ", max |dk| " + f(m45) + " (d 0.45) vs " + f(m35) + " (d 0.35)"};
}

Verdict ac10() {
  const Trajectory t = simulate_closed_loop(adaptive(0.6));
  bool frozen = true, pinned = true;
  for (std::size_t i = 0; i < t.size(); ++i) {
    frozen = frozen && t.at(i, t.column_index("k1")) == 10.0 && t.at(i, t.column_index("k2")) == 10.0 &&
             t.at(i, t.column_index("k3")) == 0.7;
    pinned = pinned && t.at(i, t.column_index("co")) == 0.05;
  }
  const double y = final_of(t, "y");
  const bool ok = frozen && pinned && std::abs(y - 0.65) <= 0.01;
  return {ok, std::string("k frozen at (10, 10, 0.7): ") + (frozen ? "yes" : "no") +
                  ", co pinned at 0.05: " + (pinned ? "yes" : "no") + ", final y = " + f(y)};
}

Eigen::Matrix3d fd_jacobian(const AveragedPoint& p) {
  Eigen::Matrix3d J;
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    AveragedPoint up = p, dn = p;
    double* ku[] = {&up.k1, &up.k2, &up.k3};
    double* kd[] = {&dn.k1, &dn.k2, &dn.k3};
    *ku[j] += h;
    *kd[j] -= h;
    const auto fu = averaged_rhs(up), fd = averaged_rhs(dn);
    for (int i = 0; i < 3; ++i) J(i, j) = (fu[i] - fd[i]) / (2.0 * h);
  }
  return J;
}

Verdict ac11() {
  AveragedPoint p;  // (10, 10, 0.7), gamma 1, r 0.55
  const auto lam = averaged_eigenvalues(p);
  Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::Matrix3d>(fd_jacobian(p)).eigenvalues();
  std::vector<double> oracle;
  for (int i = 0; i < 3; ++i) oracle.push_back(ev[i].real());
  std::sort(oracle.begin(), oracle.end(), std::greater<>());
  const double oracle_l3 = oracle[2];

  const auto grid = averaging_grid(0.1, 50.0, 0.1, 50.0, 10, p);
  double grid_max = -std::numeric_limits<double>::infinity();
  for (const auto& row : stability_verdict(grid)) grid_max = std::max(grid_max, row.eigenvalues[0]);

  AveragedPoint twice = p;
  twice.gamma = 2.0;
  const double ratio = averaged_eigenvalues(twice)[2] / lam[2];

  const bool ok = std::abs(lam[0]) <= 1e-12 && std::abs(lam[1]) <= 1e-12 && std::abs(lam[2] + 0.04795) <= 1e-4 &&
                  std::abs(lam[2] - oracle_l3) <= 1e-6 && grid_max <= 1e-9 && std::abs(ratio - 2.0) <= 2e-12;
  return {ok, "eigenvalues (" + f(lam[0]) + ", " + f(lam[1]) + ", " + f(lam[2], 9) + "), finite-difference oracle " +
                  f(oracle_l3, 9) + ", grid max " + f(grid_max) + ", gamma x2 ratio " + f(ratio, 15)};
}

Verdict ac12() {
  ClosedLoopScenario pid = adaptive(0.35);
  pid.controller.kind = ControllerKind::fixed_pid;
  pid.controller.kp = 10.0;
  pid.controller.ki = 24.0;
  pid.controller.kd = 1.0;
  const ClosedLoopScenario twin = adaptive(0.35);
  const std::vector<ClosedLoopScenario> runs{pid, twin};
  const auto t = simulate_batch(runs);
  const double e_pid = std::abs(final_of(t[0], "y") - 0.55);
  const double e_ad = std::abs(final_of(t[1], "y") - 0.55);
  const auto y = t[0].column("y");
  const double min_y = *std::min_element(y.begin(), y.end());
  const bool excursion = min_y < 0.43;
  return {e_pid > e_ad, "terminal |y - 0.55|: fixed PID " + f(e_pid) + ", adaptive " + f(e_ad) +
                            "; PID min y = " + f(min_y) + ", excursion below 0.43: " + (excursion ? "yes" : "no")};
}

double decay_error(double dt) {
  SystemDescriptor sys;
  sys.dimension = 1;
  sys.output_names = {"x"};
  sys.rhs = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
  const std::vector<double> x0{1.0};
  const Trajectory t = integrate(sys, x0, dt, 1.0);
  return std::abs(t.at(t.size() - 1, 0) - std::exp(-1.0));
}

Verdict ac13() {
  const double coarse = decay_error(0.1), fine = decay_error(0.05);
  const double ratio = coarse / fine;
  return {std::abs(ratio - 16.0) <= 0.2 * 16.0,
          "global error " + f(coarse) + " -> " + f(fine) + ", ratio " + f(ratio)};
}

// Closed-form underdamped step response of wn^2 / (s^2 + 2 zeta wn s + wn^2).
double oracle_step(double t) {
  const double zeta = 0.85, wn = 5.0;
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  return 1.0 - std::exp(-zeta * wn * t) * (std::cos(wd * t) + zeta / std::sqrt(1.0 - zeta * zeta) * std::sin(wd * t));
}

double settling_time(const std::vector<double>& t, const std::vector<double>& y) {
  double ts = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y[i] - 1.0) > 0.02) ts = t[std::min(i + 1, t.size() - 1)];
  }
  return ts;
}

Verdict ac14() {
  const ReferenceModel model;
  SystemDescriptor sys;
  sys.dimension = 2;
  sys.output_names = {"ym", "ym_dot"};
  sys.rhs = [&](double, std::span<const double> x, std::span<double> dx) {
    const auto d = reference_model_rhs(x[0], x[1], 1.0, model);
    dx[0] = d[0];
    dx[1] = d[1];
  };
  const std::vector<double> x0{0.0, 0.0};
  const double dt = 1e-3;
  const Trajectory traj = integrate(sys, x0, dt, 10.0);
  const auto ym = traj.column("ym");
  const auto ts = traj.times();

  std::vector<double> oracle(ts.size());
  double max_dev = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    oracle[i] = oracle_step(ts[i]);
    max_dev = std::max(max_dev, std::abs(ym[i] - oracle[i]));
  }
  const double gain = ym.back();
  const double overshoot = std::max(0.0, *std::max_element(ym.begin(), ym.end()) - 1.0);
  const double settle = settling_time(ts, ym);
  const double settle_oracle = settling_time(ts, oracle);
  const bool ok = std::abs(gain - 1.0) <= 1e-6 && overshoot <= 0.01 && settle >= 0.85 && settle <= 1.05 &&
                  std::abs(settle - settle_oracle) <= 2 * dt && max_dev <= 1e-6;
  return {ok, "gain " + f(gain, 12) + ", overshoot " + f(100 * overshoot) + "%, 2% settling " + f(settle) +
                  " s (closed form " + f(settle_oracle) + " s), max deviation from closed form " + f(max_dev)};
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"AC01", "surge boundary", ac01},
      {"AC02", "discriminant negative", ac02},
      {"AC03", "open-loop equilibrium", ac03},
      {"AC04", "psi_c(0.4)", ac04},
      {"AC05", "limit cycle", ac05},
      {"AC06", "Bendixson consistency", ac06},
      {"AC07", "Ziegler-Nichols gains", ac07},
      {"AC08", "adaptive, d = 0.35", ac08},
      {"AC09", "adaptive, d = 0.45", ac09},
      {"AC10", "adaptive, d = 0.6", ac10},
      {"AC11", "averaged eigenvalues", ac11},
      {"AC12", "fixed PID vs adaptive", ac12},
      {"AC13", "RK4 order", ac13},
      {"AC14", "reference model step", ac14},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    ++ran;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::cout << c.id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << v.detail << '\n';
    failed += v.pass ? 0 : 1;
  }
  if (ran == 0) {
    std::cerr << "no matching criteria\n";
    return 2;
  }
  std::cout << ran - failed << '/' << ran << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
