#pragma once

#include <array>

namespace surgekit {

/// Steady-state compressor characteristic
///
///   psi_c(phi) = psi0 + h * (c0 + c1 z + c2 z^2 + c3 z^3),   z = slope*phi + offset
///
/// The default coefficients are the single-stage cubic used throughout the
/// toolkit; its interior maximum sits at phi = 0.5 with psi_c = 0.712.
struct CompressorMap {
  double psi0 = 0.352;
  double h = 0.18;
  double slope = 4.0;
  double offset = -1.0;
  std::array<double, 4> bracket = {1.0, 1.5, 0.0, -0.5};
  double domain_lo = 0.0;
  double domain_hi = 0.8;

  // Throws DomainError if the flow bounds are inverted or non-finite.
  void validate() const;
};

/// Nondimensional mass flow and plenum pressure rise.
struct PlantState {
  double phi = 0.0;
  double psi = 0.0;
};

/// Gains of the two-state surge model and the throttle parameter g.
struct GreitzerParams {
  double a = 0.8;
  double b = 1.25;
  double g = 0.6;

  void validate() const;
};

double map_pressure_rise(const CompressorMap& map, double phi);

/// d psi_c / d phi.
double map_slope(const CompressorMap& map, double phi);

/// Second derivative of the characteristic, used by Newton polishing and
/// the maximum check.
double map_curvature(const CompressorMap& map, double phi);

/// (a (psi_c(phi) - psi), b (phi - g sqrt(psi))). Throws ModelBreakdownError
/// when psi <= 0.
PlantState greitzer_rhs(const PlantState& state, const GreitzerParams& params,
                        const CompressorMap& map);

/// g = phi / sqrt(psi_c(phi)), the throttle setting whose equilibrium is phi.
double throttle_from_flow(const CompressorMap& map, double phi);

/// Unique equilibrium for throttle g: bisection on the flow domain followed by
/// Newton polishing on psi_c(phi) - (phi/g)^2.
PlantState equilibrium_from_throttle(const CompressorMap& map, double g);

}  // namespace surgekit
