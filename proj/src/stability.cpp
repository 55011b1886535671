#include "surgekit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"

namespace surgekit {

namespace {

void require_interior(const CompressorMap& map, double phi) {
  if (!std::isfinite(phi) || !(phi > map.domain_lo) || !(phi < map.domain_hi)) {
    throw DomainError("phi = " + std::to_string(phi) + " outside the open flow domain (" +
                      std::to_string(map.domain_lo) + ", " + std::to_string(map.domain_hi) + ")");
  }
}

double trace(const Matrix2& j) { return j[0][0] + j[1][1]; }
double det(const Matrix2& j) { return j[0][0] * j[1][1] - j[0][1] * j[1][0]; }

StabilityRow make_row(const CompressorMap& map, double phi, const GreitzerParams& gains) {
  const Matrix2 j = jacobian_at_equilibrium(map, phi, gains);
  const double tr = trace(j);
  StabilityRow row;
  row.phi = phi;
  row.discriminant = tr * tr - 4.0 * det(j);
  row.real_part = 0.5 * tr;
  row.bendixson_r = bendixson_indicator(map, phi, gains);
  row.classification = classify(row.real_part);
  return row;
}

void check_scan_args(const CompressorMap& map, double lo, double hi, std::size_t n) {
  if (n < 2) throw DomainError("stability scan needs n >= 2");
  if (!(lo > map.domain_lo) || !(hi < map.domain_hi) || !(lo < hi)) {
    throw DomainError("stability scan range must satisfy domain_lo < lo < hi < domain_hi");
  }
}

}  // namespace

std::string_view to_string(FocusClass c) {
  switch (c) {
    case FocusClass::stable_focus:
      return "stable-focus";
    case FocusClass::unstable_focus:
      return "unstable-focus";
    case FocusClass::boundary:
      return "boundary";
  }
  return "boundary";
}

Matrix2 jacobian_at_equilibrium(const CompressorMap& map, double phi, const GreitzerParams& gains) {
  require_interior(map, phi);
  const double psi_c = map_pressure_rise(map, phi);
  if (!(psi_c > 0.0)) throw DomainError("map pressure rise is not positive at phi");
  // At equilibrium g / (2 sqrt(psi)) = phi / (2 psi_c(phi)).
  return Matrix2{{{gains.a * map_slope(map, phi), -gains.a},
                  {gains.b, -0.5 * gains.b * phi / psi_c}}};
}

CharPoly char_poly(const CompressorMap& map, double phi, const GreitzerParams& gains) {
  const Matrix2 j = jacobian_at_equilibrium(map, phi, gains);
  return {-trace(j), det(j)};
}

std::array<std::complex<double>, 2> char_poly_roots(const CharPoly& p) {
  const double disc = p.b * p.b - 4.0 * p.c;
  if (disc < 0.0) {
    const double re = -0.5 * p.b;
    const double im = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(re, im), std::complex<double>(re, -im)};
  }
  // Cancellation-free real roots.
  const double q = -0.5 * (p.b + std::copysign(std::sqrt(disc), p.b));
  if (q == 0.0) return {std::complex<double>(0.0), std::complex<double>(0.0)};
  return {std::complex<double>(q), std::complex<double>(p.c / q)};
}

double discriminant(const CompressorMap& map, double phi, const GreitzerParams& gains) {
  const CharPoly p = char_poly(map, phi, gains);
  return p.b * p.b - 4.0 * p.c;
}

double eig_real_part(const CompressorMap& map, double phi, const GreitzerParams& gains) {
  return 0.5 * trace(jacobian_at_equilibrium(map, phi, gains));
}

double bendixson_indicator(const CompressorMap& map, double phi, const GreitzerParams& gains) {
  require_interior(map, phi);
  const double psi_c = map_pressure_rise(map, phi);
  // d f1/d phi + d f2/d psi with g^2 / (2 phi) = phi / (2 psi_c).
  return gains.a * map_slope(map, phi) - 0.5 * gains.b * phi / psi_c;
}

FocusClass classify(double real_part) {
  if (real_part < -kClassificationTol) return FocusClass::stable_focus;
  if (real_part > kClassificationTol) return FocusClass::unstable_focus;
  return FocusClass::boundary;
}

double surge_boundary(const CompressorMap& map, double lo, double hi, const GreitzerParams& gains) {
  require_interior(map, lo);
  require_interior(map, hi);
  if (!(lo < hi)) throw DomainError("surge_boundary requires lo < hi");

  constexpr std::size_t kGrid = 1000;
  const auto grid = linspace(lo, hi, kGrid);
  auto f = [&](double phi) { return eig_real_part(map, phi, gains); };

  double b = grid.back();
  double fb = f(b);
  if (fb == 0.0) return b;
  for (std::size_t i = kGrid - 1; i-- > 0;) {
    const double a = grid[i];
    const double fa = f(a);
    if (fa == 0.0) return a;
    if ((fa > 0.0) != (fb > 0.0)) {
      double left = a, right = b, f_left = fa;
      double mid = 0.5 * (left + right);
      for (int it = 0; it < 200 && right - left > 1e-15; ++it) {
        mid = 0.5 * (left + right);
        const double fm = f(mid);
        if (fm == 0.0) break;
        if ((fm > 0.0) == (f_left > 0.0)) {
          left = mid;
          f_left = fm;
        } else {
          right = mid;
        }
      }
      if (std::abs(f(mid)) > 1e-10) {
        throw AnalysisError("surge boundary bisection did not reach |f| <= 1e-10");
      }
      return mid;
    }
    b = a;
    fb = fa;
  }
  throw AnalysisError("eigenvalue real part has no sign change on the scan range");
}

LimitCycleReport detect_limit_cycle(const Trajectory& traj, const LimitCycleOptions& opts) {
  if (!(opts.settle_fraction > 0.0) || !(opts.settle_fraction < 1.0)) {
    throw DomainError("settle_fraction must lie in (0, 1)");
  }
  LimitCycleReport report;
  if (traj.size() < 3) return report;

  const std::size_t phi_col = traj.column_index(opts.phi_column);
  const auto start = static_cast<std::size_t>(std::floor(opts.settle_fraction * static_cast<double>(traj.size())));
  const std::size_t m = traj.size() - start;
  if (m < 3) return report;

  std::vector<double> phi(m);
  for (std::size_t i = 0; i < m; ++i) phi[i] = traj.at(start + i, phi_col);

  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (phi[i] > phi[i - 1] && phi[i] >= phi[i + 1]) peaks.push_back(i);
  }

  if (traj.has_column(opts.psi_column)) {
    const std::size_t psi_col = traj.column_index(opts.psi_column);
    double lo = traj.at(start, psi_col), hi = lo;
    for (std::size_t i = start; i < traj.size(); ++i) {
      lo = std::min(lo, traj.at(i, psi_col));
      hi = std::max(hi, traj.at(i, psi_col));
    }
    report.amplitude_psi = hi - lo;
  }

  if (peaks.size() < 2) return report;
  report.cycles_analyzed = peaks.size() - 1;
  report.period = traj.dt() * static_cast<double>(peaks.back() - peaks.front()) /
                  static_cast<double>(peaks.size() - 1);

  // Peak-to-peak amplitude of each cycle: closing peak minus the trough before it.
  std::vector<double> amplitudes;
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    const auto first = phi.begin() + static_cast<std::ptrdiff_t>(peaks[k]);
    const auto last = phi.begin() + static_cast<std::ptrdiff_t>(peaks[k + 1]) + 1;
    amplitudes.push_back(phi[peaks[k + 1]] - *std::min_element(first, last));
  }
  const std::size_t use = std::min<std::size_t>(3, amplitudes.size());
  const auto tail = std::span<const double>(amplitudes).last(use);
  const auto [mn, mx] = std::minmax_element(tail.begin(), tail.end());
  double mean = 0.0;
  for (double a : tail) mean += a;
  mean /= static_cast<double>(use);
  report.amplitude_phi = mean;
  report.amplitude_spread = mean > 0.0 ? (*mx - *mn) / mean : 0.0;

  report.detected = peaks.size() >= 4 && mean >= opts.min_amplitude && report.period > 0.0 &&
                    report.amplitude_spread <= opts.tol;
  return report;
}

std::vector<StabilityRow> stability_scan(const CompressorMap& map, double phi_lo, double phi_hi,
                                         std::size_t n, const GreitzerParams& gains) {
  check_scan_args(map, phi_lo, phi_hi, n);
  const auto phis = linspace(phi_lo, phi_hi, n);
  std::vector<StabilityRow> rows(n);
  detail::parallel_for(n, [&](std::size_t i) { rows[i] = make_row(map, phis[i], gains); });
  return rows;
}

namespace serial {

std::vector<StabilityRow> stability_scan(const CompressorMap& map, double phi_lo, double phi_hi,
                                         std::size_t n, const GreitzerParams& gains) {
  check_scan_args(map, phi_lo, phi_hi, n);
  const auto phis = linspace(phi_lo, phi_hi, n);
  std::vector<StabilityRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = make_row(map, phis[i], gains);
  return rows;
}

}  // namespace serial

}  // namespace surgekit
