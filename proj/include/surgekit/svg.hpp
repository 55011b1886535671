#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgekit/ode.hpp"

namespace surgekit {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  // Phase-plane plots mark each orbit's starting point.
  bool phase_plane = false;
  int width = 720;
  int height = 440;
};

/// Signal against time.
Series time_series(const Trajectory& traj, std::string_view column, std::string label = {});

/// One signal against another, e.g. (phi, psi) orbits.
Series phase_series(const Trajectory& traj, std::string_view x_column, std::string_view y_column,
                    std::string label = {});

/// Standalone SVG document with axes, ticks, polylines and a legend.
/// Throws DomainError on an empty series set or mismatched lengths.
std::string render_svg(std::span<const Series> series, const PlotSpec& spec);
void render_svg(std::span<const Series> series, const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace surgekit
