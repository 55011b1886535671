#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

#include "surgekit/compressor.hpp"
#include "surgekit/ode.hpp"

namespace surgekit {

/// Row-major 2x2 matrix.
using Matrix2 = std::array<std::array<double, 2>, 2>;

/// s^2 + b s + c.
struct CharPoly {
  double b = 0.0;
  double c = 0.0;
};

enum class FocusClass { stable_focus, unstable_focus, boundary };

std::string_view to_string(FocusClass c);

inline constexpr double kClassificationTol = 1e-9;

struct StabilityRow {
  double phi = 0.0;
  double discriminant = 0.0;
  double real_part = 0.0;
  double bendixson_r = 0.0;
  FocusClass classification = FocusClass::boundary;

  friend bool operator==(const StabilityRow&, const StabilityRow&) = default;
};

// Equilibrium-substituted linearization: g and psi are eliminated through
// psi = psi_c(phi) and phi = g sqrt(psi), so every quantity depends on phi
// alone. All of them require phi strictly inside the map's flow domain.

Matrix2 jacobian_at_equilibrium(const CompressorMap& map, double phi,
                                const GreitzerParams& gains = {});

CharPoly char_poly(const CompressorMap& map, double phi, const GreitzerParams& gains = {});

/// Roots of the characteristic polynomial (closed-form quadratic).
std::array<std::complex<double>, 2> char_poly_roots(const CharPoly& p);

double discriminant(const CompressorMap& map, double phi, const GreitzerParams& gains = {});

/// Real part of the eigenvalue pair, trace(J)/2.
double eig_real_part(const CompressorMap& map, double phi, const GreitzerParams& gains = {});

/// Divergence of the vector field on the equilibrium manifold; equals trace(J).
double bendixson_indicator(const CompressorMap& map, double phi, const GreitzerParams& gains = {});

FocusClass classify(double real_part);

/// Largest root of eig_real_part on (lo, hi), located by a 1000-point sign scan
/// from the high end and refined by bisection to |f| <= 1e-10.
double surge_boundary(const CompressorMap& map, double lo = 0.1, double hi = 0.79,
                      const GreitzerParams& gains = {});

struct LimitCycleOptions {
  double settle_fraction = 0.5;
  double tol = 0.01;
  // Cycles smaller than this are treated as decayed transients.
  double min_amplitude = 1e-6;
  std::string_view phi_column = "phi";
  std::string_view psi_column = "psi";
};

struct LimitCycleReport {
  bool detected = false;
  double amplitude_phi = 0.0;
  double amplitude_psi = 0.0;
  double period = 0.0;
  std::size_t cycles_analyzed = 0;
  // Relative spread of the last three peak-to-peak amplitudes.
  double amplitude_spread = 0.0;
};

LimitCycleReport detect_limit_cycle(const Trajectory& traj, const LimitCycleOptions& opts = {});

/// n rows on [phi_lo, phi_hi], OpenMP-parallel over rows.
std::vector<StabilityRow> stability_scan(const CompressorMap& map, double phi_lo, double phi_hi,
                                         std::size_t n, const GreitzerParams& gains = {});

namespace serial {
std::vector<StabilityRow> stability_scan(const CompressorMap& map, double phi_lo, double phi_hi,
                                         std::size_t n, const GreitzerParams& gains = {});
}  // namespace serial

}  // namespace surgekit
