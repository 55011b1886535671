#include "surgekit/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "parallel.hpp"
#include "surgekit/errors.hpp"
#include "surgekit/ode.hpp"

namespace surgekit {

namespace {

double loop_denominator(const AveragedPoint& p) {
  const double q = 1.0 + p.k2;
  if (q == 0.0 || !std::isfinite(q)) {
    throw SingularityError("averaged dynamics are singular at k2 = -1");
  }
  return q;
}

AveragingRow make_row(const AveragedPoint& p) {
  AveragingRow row;
  row.point = p;
  row.eigenvalues = averaged_eigenvalues(p);
  row.stable = row.eigenvalues[0] <= kVerdictTol;
  return row;
}

}  // namespace

void AveragedPoint::validate() const {
  for (double v : {k1, k2, k3, r, gamma}) {
    if (!std::isfinite(v)) throw DomainError("averaged point entries must be finite");
  }
  if (k1 < 0.0 || k2 < 0.0 || k3 < 0.0) throw DomainError("adaptive parameters must be >= 0");
  if (!(gamma > 0.0)) throw DomainError("adaptation gain gamma must be positive");
  loop_denominator(*this);
}

std::array<double, 3> averaged_rhs(const AveragedPoint& p) {
  const double q = loop_denominator(p);
  if (p.mode == ActuatorMode::saturated) return {0.0, 0.0, 0.0};
  const double scale = p.gamma * p.r * p.r;
  const double m = p.k1 / q;
  return {-scale * (m - 1.0), scale * (m - 1.0) * m, 0.0};
}

Matrix3 averaged_jacobian(const AveragedPoint& p) {
  const double q = loop_denominator(p);
  Matrix3 j{};
  if (p.mode == ActuatorMode::saturated) return j;
  const double s = p.gamma * p.r * p.r;
  const double q2 = q * q;
  const double q3 = q2 * q;
  j[0][0] = -s / q;
  j[0][1] = s * p.k1 / q2;
  j[1][0] = s * (2.0 * p.k1 / q2 - 1.0 / q);
  j[1][1] = s * (p.k1 / q2 - 2.0 * p.k1 * p.k1 / q3);
  return j;
}

std::array<double, 3> averaged_eigenvalues(const AveragedPoint& p) {
  const Matrix3 j = averaged_jacobian(p);
  // Zero third row: lambda = 0 plus the eigenvalues of the (k1, k2) block.
  const double tr = j[0][0] + j[1][1];
  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  double disc = tr * tr - 4.0 * det;
  // The block is singular up to rounding; a tiny negative discriminant is
  // rounding noise around a repeated real root.
  if (disc < 0.0) {
    if (disc < -1e-12 * std::max(1.0, tr * tr)) {
      throw AnalysisError("averaged Jacobian block has complex eigenvalues");
    }
    disc = 0.0;
  }
  double a = 0.0, b = 0.0;
  if (tr != 0.0 || det != 0.0) {
    const double q = 0.5 * (tr + std::copysign(std::sqrt(disc), tr));
    a = q;
    b = q != 0.0 ? det / q : 0.0;
  }
  std::array<double, 3> eig{a, b, 0.0};
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

std::string_view verdict_label(bool stable) { return stable ? "stable" : "unstable"; }

std::vector<AveragingRow> stability_verdict(const std::vector<AveragedPoint>& grid) {
  for (const auto& p : grid) p.validate();
  std::vector<AveragingRow> rows(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) { rows[i] = make_row(grid[i]); });
  return rows;
}

namespace serial {

std::vector<AveragingRow> stability_verdict(const std::vector<AveragedPoint>& grid) {
  std::vector<AveragingRow> rows;
  rows.reserve(grid.size());
  for (const auto& p : grid) {
    p.validate();
    rows.push_back(make_row(p));
  }
  return rows;
}

}  // namespace serial

std::vector<AveragedPoint> averaging_grid(double k1_lo, double k1_hi, double k2_lo, double k2_hi,
                                          std::size_t n, const AveragedPoint& base) {
  if (n == 0) throw DomainError("averaging grid needs n >= 1");
  if (!(k1_lo <= k1_hi) || !(k2_lo <= k2_hi)) throw DomainError("averaging grid ranges need lo <= hi");
  const auto k1s = linspace(k1_lo, k1_hi, n);
  const auto k2s = linspace(k2_lo, k2_hi, n);
  std::vector<AveragedPoint> grid;
  grid.reserve(n * n);
  for (double k2 : k2s) {
    for (double k1 : k1s) {
      AveragedPoint p = base;
      p.k1 = k1;
      p.k2 = k2;
      grid.push_back(p);
    }
  }
  return grid;
}

}  // namespace surgekit
