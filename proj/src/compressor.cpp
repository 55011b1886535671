#include "surgekit/compressor.hpp"

#include <cmath>
#include <string>

#include "surgekit/errors.hpp"

namespace surgekit {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be finite");
  }
}

// Equilibrium residual psi_c(phi) - (phi/g)^2.
double residual(const CompressorMap& map, double g, double phi) {
  const double q = phi / g;
  return map_pressure_rise(map, phi) - q * q;
}

double residual_slope(const CompressorMap& map, double g, double phi) {
  return map_slope(map, phi) - 2.0 * phi / (g * g);
}

}  // namespace

void CompressorMap::validate() const {
  if (!std::isfinite(domain_lo) || !std::isfinite(domain_hi) || !(domain_lo < domain_hi)) {
    throw DomainError("compressor map requires domain_lo < domain_hi");
  }
  for (double c : {psi0, h, slope, offset, bracket[0], bracket[1], bracket[2], bracket[3]}) {
    require_finite(c, "compressor map coefficient");
  }
}

void GreitzerParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(g > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
      !std::isfinite(g)) {
    throw DomainError("Greitzer parameters a, b, g must be positive");
  }
}

double map_pressure_rise(const CompressorMap& map, double phi) {
  require_finite(phi, "phi");
  const double z = map.slope * phi + map.offset;
  const auto& c = map.bracket;
  return map.psi0 + map.h * (c[0] + z * (c[1] + z * (c[2] + z * c[3])));
}

double map_slope(const CompressorMap& map, double phi) {
  require_finite(phi, "phi");
  const double z = map.slope * phi + map.offset;
  const auto& c = map.bracket;
  return map.h * map.slope * (c[1] + z * (2.0 * c[2] + 3.0 * c[3] * z));
}

double map_curvature(const CompressorMap& map, double phi) {
  require_finite(phi, "phi");
  const double z = map.slope * phi + map.offset;
  const auto& c = map.bracket;
  return map.h * map.slope * map.slope * (2.0 * c[2] + 6.0 * c[3] * z);
}

PlantState greitzer_rhs(const PlantState& state, const GreitzerParams& params,
                        const CompressorMap& map) {
  if (!std::isfinite(state.phi) || !std::isfinite(state.psi)) {
    throw ModelBreakdownError("Greitzer state is not finite");
  }
  if (!(state.psi > 0.0)) {
    throw ModelBreakdownError("plenum pressure psi = " + std::to_string(state.psi) +
                              " <= 0; throttle term sqrt(psi) undefined");
  }
  return {params.a * (map_pressure_rise(map, state.phi) - state.psi),
          params.b * (state.phi - params.g * std::sqrt(state.psi))};
}

double throttle_from_flow(const CompressorMap& map, double phi) {
  require_finite(phi, "phi");
  if (!(phi > 0.0)) {
    throw DomainError("throttle_from_flow requires phi > 0");
  }
  const double psi = map_pressure_rise(map, phi);
  if (!(psi > 0.0)) {
    throw DomainError("map pressure rise is not positive at phi = " + std::to_string(phi));
  }
  return phi / std::sqrt(psi);
}

PlantState equilibrium_from_throttle(const CompressorMap& map, double g) {
  if (!std::isfinite(g) || !(g > 0.0)) {
    throw DomainError("equilibrium_from_throttle requires g > 0");
  }
  constexpr double kEdge = 1e-6;
  double lo = map.domain_lo + kEdge;
  double hi = map.domain_hi - kEdge;
  double f_lo = residual(map, g, lo);
  const double f_hi = residual(map, g, hi);
  if (f_lo == 0.0) return {lo, map_pressure_rise(map, lo)};
  if (f_hi == 0.0) return {hi, map_pressure_rise(map, hi)};
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NoEquilibriumError("no sign change of psi_c(phi) - (phi/g)^2 on the flow domain for g = " +
                             std::to_string(g));
  }

  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = residual(map, g, mid);
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }

  const double bracket_lo = lo;
  const double bracket_hi = hi;
  double phi = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double d = residual_slope(map, g, phi);
    if (d == 0.0) break;
    const double next = phi - residual(map, g, phi) / d;
    // Newton may only refine inside the bisection bracket.
    if (!(next >= bracket_lo - 1e-12 && next <= bracket_hi + 1e-12)) break;
    phi = next;
  }
  return {phi, map_pressure_rise(map, phi)};
}

}  // namespace surgekit
