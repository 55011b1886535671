#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace surgekit {

enum class ActuatorMode { linear, saturated };

/// Operating point of the slow parameter dynamics obtained by averaging the
/// MIT-rule updates at zero frequency (constant reference).
struct AveragedPoint {
  double k1 = 10.0;
  double k2 = 10.0;
  double k3 = 0.7;
  double r = 0.55;
  double gamma = 1.0;
  ActuatorMode mode = ActuatorMode::linear;

  void validate() const;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// With q = 1 + k2 and m = k1/q (the zero-frequency loop gain):
///   k1' = -gamma r^2 (m - 1)
///   k2' =  gamma r^2 (m - 1) m
///   k3' =  0
/// and identically zero when the actuator is saturated.
std::array<double, 3> averaged_rhs(const AveragedPoint& p);

/// Analytic Jacobian of averaged_rhs with respect to (k1, k2, k3).
Matrix3 averaged_jacobian(const AveragedPoint& p);

/// Eigenvalues sorted descending. The third row and column vanish, so one
/// eigenvalue is 0 and the other two come from the (k1, k2) block. That
/// block is singular, which leaves a second zero and its trace
///   -gamma r^2 (q^2 - k1 q + 2 k1^2) / q^3.
std::array<double, 3> averaged_eigenvalues(const AveragedPoint& p);

inline constexpr double kVerdictTol = 1e-9;

struct AveragingRow {
  AveragedPoint point;
  std::array<double, 3> eigenvalues{};
  bool stable = false;
};

std::string_view verdict_label(bool stable);

/// One row per point, stable iff the largest eigenvalue is <= 1e-9.
/// OpenMP-parallel over points.
std::vector<AveragingRow> stability_verdict(const std::vector<AveragedPoint>& grid);

namespace serial {
std::vector<AveragingRow> stability_verdict(const std::vector<AveragedPoint>& grid);
}  // namespace serial

/// n x n grid over [k1_lo, k1_hi] x [k2_lo, k2_hi], k1 varying fastest.
std::vector<AveragedPoint> averaging_grid(double k1_lo, double k1_hi, double k2_lo, double k2_hi,
                                          std::size_t n, const AveragedPoint& base);

}  // namespace surgekit
