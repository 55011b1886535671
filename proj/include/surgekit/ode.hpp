#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgekit/compressor.hpp"
#include "surgekit/errors.hpp"

namespace surgekit {

/// Uniformly sampled multi-signal time series. Row i is stamped t = i*dt;
/// the time column is implicit and never listed in columns().
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double dt, std::vector<std::string> columns);

  // Rejects width mismatches and non-finite samples.
  void append(std::span<const double> values);

  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return width_ == 0 ? 0 : data_.size() / width_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t width() const noexcept { return width_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  double time(std::size_t row) const noexcept { return static_cast<double>(row) * dt_; }
  std::span<const double> row(std::size_t i) const;
  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

  std::size_t column_index(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
  std::vector<double> column(std::size_t index) const;
  std::vector<double> times() const;

  // Keeps every `factor`-th row (row 0 always kept); dt scales accordingly.
  Trajectory decimated(std::size_t factor) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  double dt_ = 0.0;
  std::size_t width_ = 0;
  std::vector<std::string> columns_;
  std::vector<double> data_;
};

using StateVector = std::vector<double>;

/// Autonomous or time-varying first-order system x' = f(t, x).
///
/// `observe` maps a state to the recorded signals; when empty the state itself
/// is recorded and `output_names` must name every state component.
/// `constrain`, when set, projects the state after each accepted step.
struct SystemDescriptor {
  std::size_t dimension = 0;
  std::function<void(double t, std::span<const double> x, std::span<double> dxdt)> rhs;
  std::vector<std::string> output_names;
  std::function<void(double t, std::span<const double> x, std::span<double> out)> observe;
  std::function<void(std::span<double> x)> constrain;

  void validate() const;
};

/// Non-finite stage value during integration. `partial` holds every row
/// recorded before the failure when raised from integrate().
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, double time, StateVector state)
      : Error(message), time_(time), state_(std::move(state)) {}

  double time() const noexcept { return time_; }
  const StateVector& state() const noexcept { return state_; }
  const std::shared_ptr<const Trajectory>& partial() const noexcept { return partial_; }
  void attach_partial(std::shared_ptr<const Trajectory> p) { partial_ = std::move(p); }

 private:
  double time_;
  StateVector state_;
  std::shared_ptr<const Trajectory> partial_;
};

/// One classical fourth-order Runge-Kutta step.
StateVector step_rk4(const SystemDescriptor& sys, double t, std::span<const double> state, double dt);

/// Fixed-step RK4 from t = 0: floor(t_end/dt) steps, recording the initial row
/// plus one row per step.
Trajectory integrate(const SystemDescriptor& sys, std::span<const double> initial, double dt,
                     double t_end);

/// Mean of the trailing `window` (time units) if every signal's peak-to-peak
/// spread inside the window is <= tol.
std::optional<StateVector> steady_state_of(const Trajectory& traj, double window, double tol);

/// Two-state surge model with outputs "phi", "psi".
SystemDescriptor greitzer_system(const CompressorMap& map, const GreitzerParams& params);

struct VectorFieldSample {
  PlantState state;
  PlantState derivative;
};

struct GridRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// n x n evaluations of the surge-model vector field, row-major with psi as
/// the slow index: sample(i_psi, i_phi) = result[i_psi * n + i_phi]. With
/// n = 1 the single node sits at the lower corner. OpenMP-parallel over rows.
std::vector<VectorFieldSample> vector_field_grid(const CompressorMap& map, double g,
                                                 GridRange phi, GridRange psi, std::size_t n);

namespace serial {
std::vector<VectorFieldSample> vector_field_grid(const CompressorMap& map, double g,
                                                 GridRange phi, GridRange psi, std::size_t n);
}  // namespace serial

/// n evenly spaced points on [lo, hi]; n = 1 yields {lo}.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace surgekit
