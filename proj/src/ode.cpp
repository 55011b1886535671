#include "surgekit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace surgekit {

Trajectory::Trajectory(double dt, std::vector<std::string> columns)
    : dt_(dt), width_(columns.size()), columns_(std::move(columns)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("trajectory time step must be positive");
  }
  if (width_ == 0) {
    throw DomainError("trajectory needs at least one column");
  }
}

void Trajectory::append(std::span<const double> values) {
  if (values.size() != width_) {
    throw DomainError("trajectory row has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(width_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DomainError("trajectory rows must be finite");
    }
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

std::span<const double> Trajectory::row(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * width_, width_);
}

std::size_t Trajectory::column_index(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) {
    throw DomainError("trajectory has no column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - columns_.begin());
}

bool Trajectory::has_column(std::string_view name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::vector<double> Trajectory::column(std::string_view name) const {
  return column(column_index(name));
}

std::vector<double> Trajectory::column(std::size_t index) const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i, index));
  return out;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = time(i);
  return out;
}

Trajectory Trajectory::decimated(std::size_t factor) const {
  if (factor == 0) throw DomainError("decimation factor must be >= 1");
  if (factor == 1) return *this;
  Trajectory out(dt_ * static_cast<double>(factor), columns_);
  for (std::size_t i = 0; i < size(); i += factor) out.append(row(i));
  return out;
}

void SystemDescriptor::validate() const {
  if (dimension == 0) throw DomainError("system dimension must be positive");
  if (!rhs) throw DomainError("system has no right-hand side");
  if (!observe && output_names.size() != dimension) {
    throw DomainError("output_names must label every state when no observer is given");
  }
  if (output_names.empty()) throw DomainError("system records no outputs");
}

namespace {

std::string describe(double t, std::span<const double> state) {
  std::ostringstream os;
  os << "t = " << t << ", state = [";
  for (std::size_t i = 0; i < state.size(); ++i) os << (i ? ", " : "") << state[i];
  os << "]";
  return os.str();
}

void check_stage(std::span<const double> k, double t, std::span<const double> state) {
  for (double v : k) {
    if (!std::isfinite(v)) {
      throw DivergenceError("non-finite derivative at " + describe(t, state), t,
                            StateVector(state.begin(), state.end()));
    }
  }
}

}  // namespace

StateVector step_rk4(const SystemDescriptor& sys, double t, std::span<const double> state, double dt) {
  const std::size_t n = sys.dimension;
  if (state.size() != n) throw DomainError("state length does not match system dimension");
  if (!(dt > 0.0)) throw DomainError("step size must be positive");

  StateVector k1(n), k2(n), k3(n), k4(n), tmp(n);
  sys.rhs(t, state, k1);
  check_stage(k1, t, state);

  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
  sys.rhs(t + 0.5 * dt, tmp, k2);
  check_stage(k2, t, state);

  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
  sys.rhs(t + 0.5 * dt, tmp, k3);
  check_stage(k3, t, state);

  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
  sys.rhs(t + dt, tmp, k4);
  check_stage(k4, t, state);

  StateVector next(n);
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  check_stage(next, t + dt, state);
  if (sys.constrain) sys.constrain(next);
  return next;
}

Trajectory integrate(const SystemDescriptor& sys, std::span<const double> initial, double dt,
                     double t_end) {
  sys.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be positive");
  if (initial.size() != sys.dimension) {
    throw DomainError("initial state length does not match system dimension");
  }

  // Guard against t_end/dt landing a hair below an integer.
  const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));

  auto traj = std::make_shared<Trajectory>(dt, sys.output_names);
  StateVector state(initial.begin(), initial.end());
  StateVector out(sys.output_names.size());

  auto record = [&](double t) {
    if (sys.observe) {
      sys.observe(t, state, out);
    } else {
      std::copy(state.begin(), state.end(), out.begin());
    }
    for (double v : out) {
      if (!std::isfinite(v)) {
        throw DivergenceError("non-finite output at " + describe(t, state), t, state);
      }
    }
    traj->append(out);
  };

  try {
    record(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
      const double t = static_cast<double>(i) * dt;
      state = step_rk4(sys, t, state, dt);
      record(static_cast<double>(i + 1) * dt);
    }
  } catch (DivergenceError& e) {
    e.attach_partial(traj);
    throw;
  }
  return std::move(*traj);
}

std::optional<StateVector> steady_state_of(const Trajectory& traj, double window, double tol) {
  if (traj.empty()) return std::nullopt;
  const auto rows = static_cast<std::size_t>(std::ceil(window / traj.dt() - 1e-9)) + 1;
  if (!(window > 0.0) || rows >= traj.size()) {
    throw DomainError("steady-state window must be positive and shorter than the trajectory");
  }
  const std::size_t first = traj.size() - rows;
  StateVector mean(traj.width(), 0.0);
  for (std::size_t c = 0; c < traj.width(); ++c) {
    double lo = traj.at(first, c);
    double hi = lo;
    double sum = 0.0;
    for (std::size_t i = first; i < traj.size(); ++i) {
      const double v = traj.at(i, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    if (hi - lo > tol) return std::nullopt;
    mean[c] = sum / static_cast<double>(rows);
  }
  return mean;
}

SystemDescriptor greitzer_system(const CompressorMap& map, const GreitzerParams& params) {
  map.validate();
  params.validate();
  SystemDescriptor sys;
  sys.dimension = 2;
  sys.output_names = {"phi", "psi"};
  sys.rhs = [map, params](double, std::span<const double> x, std::span<double> dx) {
    const PlantState d = greitzer_rhs({x[0], x[1]}, params, map);
    dx[0] = d.phi;
    dx[1] = d.psi;
  };
  return sys;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  if (n > 1) out.back() = hi;
  return out;
}

namespace {

void check_field_args(double g, GridRange phi, GridRange psi, std::size_t n) {
  if (n == 0) throw DomainError("vector field grid needs n >= 1");
  if (!(g > 0.0)) throw DomainError("throttle parameter g must be positive");
  if (!(phi.lo <= phi.hi) || !(psi.lo <= psi.hi)) throw DomainError("grid ranges must satisfy lo <= hi");
  if (!(psi.lo > 0.0)) throw DomainError("psi range must lie above zero");
}

VectorFieldSample field_node(const CompressorMap& map, const GreitzerParams& params,
                             const std::vector<double>& phis, const std::vector<double>& psis,
                             std::size_t n, std::size_t index) {
  const PlantState s{phis[index % n], psis[index / n]};
  return {s, greitzer_rhs(s, params, map)};
}

}  // namespace

std::vector<VectorFieldSample> vector_field_grid(const CompressorMap& map, double g,
                                                 GridRange phi, GridRange psi, std::size_t n) {
  check_field_args(g, phi, psi, n);
  const GreitzerParams params{.g = g};
  const auto phis = linspace(phi.lo, phi.hi, n);
  const auto psis = linspace(psi.lo, psi.hi, n);
  std::vector<VectorFieldSample> out(n * n);
  detail::parallel_for(n * n, [&](std::size_t i) { out[i] = field_node(map, params, phis, psis, n, i); });
  return out;
}

namespace serial {

std::vector<VectorFieldSample> vector_field_grid(const CompressorMap& map, double g,
                                                 GridRange phi, GridRange psi, std::size_t n) {
  check_field_args(g, phi, psi, n);
  const GreitzerParams params{.g = g};
  const auto phis = linspace(phi.lo, phi.hi, n);
  const auto psis = linspace(psi.lo, psi.hi, n);
  std::vector<VectorFieldSample> out(n * n);
  for (std::size_t i = 0; i < n * n; ++i) out[i] = field_node(map, params, phis, psis, n, i);
  return out;
}

}  // namespace serial

}  // namespace surgekit
