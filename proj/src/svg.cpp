#include "surgekit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "surgekit/csv.hpp"
#include "surgekit/errors.hpp"

namespace surgekit {

namespace {

constexpr std::string_view kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                         "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Degenerate ranges (constant data) are widened so the line sits mid-plot.
  void pad() {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      const double w = std::abs(hi) > 0.0 ? 0.1 * std::abs(hi) : 0.5;
      lo -= w;
      hi += w;
    }
  }
};

// 1-2-5 tick spacing giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

std::vector<double> ticks(Range r, int target) {
  const double step = nice_step(r.hi - r.lo, target);
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

Series time_series(const Trajectory& traj, std::string_view column, std::string label) {
  Series s;
  s.label = label.empty() ? std::string(column) : std::move(label);
  s.x = traj.times();
  s.y = traj.column(column);
  return s;
}

Series phase_series(const Trajectory& traj, std::string_view x_column, std::string_view y_column,
                    std::string label) {
  Series s;
  s.label = label.empty() ? std::string(y_column) + " vs " + std::string(x_column) : std::move(label);
  s.x = traj.column(x_column);
  s.y = traj.column(y_column);
  return s;
}

std::string render_svg(std::span<const Series> series, const PlotSpec& spec) {
  if (series.empty()) throw DomainError("render_svg needs at least one series");
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw DomainError("series '" + s.label + "' is empty or has mismatched x/y lengths");
    }
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.pad();
  yr.pad();

  const double left = 70, right = 150, top = 40, bottom = 55;
  const double w = spec.width, h = spec.height;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::ostringstream os;
  os << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << spec.width << R"(" height=")" << spec.height
     << R"(" viewBox="0 0 )" << spec.width << ' ' << spec.height << R"(" font-family="sans-serif" font-size="12">)"
     << '\n';
  os << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  if (!spec.title.empty()) {
    os << R"(<text x=")" << fmt(left + pw / 2) << R"(" y="22" text-anchor="middle" font-size="15">)"
       << escape(spec.title) << "</text>\n";
  }

  os << R"(<g class="axes" stroke="#333" stroke-width="1">)" << '\n';
  os << R"(<rect x=")" << fmt(left) << R"(" y=")" << fmt(top) << R"(" width=")" << fmt(pw) << R"(" height=")"
     << fmt(ph) << R"(" fill="none"/>)" << '\n';
  for (double t : ticks(xr, 6)) {
    os << R"(<line x1=")" << fmt(px(t)) << R"(" y1=")" << fmt(top + ph) << R"(" x2=")" << fmt(px(t))
       << R"(" y2=")" << fmt(top + ph + 5) << R"("/>)" << '\n';
  }
  for (double t : ticks(yr, 5)) {
    os << R"(<line x1=")" << fmt(left - 5) << R"(" y1=")" << fmt(py(t)) << R"(" x2=")" << fmt(left)
       << R"(" y2=")" << fmt(py(t)) << R"("/>)" << '\n';
  }
  os << "</g>\n";

  os << R"(<g class="tick-labels" fill="#333">)" << '\n';
  for (double t : ticks(xr, 6)) {
    os << R"(<text x=")" << fmt(px(t)) << R"(" y=")" << fmt(top + ph + 18) << R"(" text-anchor="middle">)"
       << format_number(t) << "</text>\n";
  }
  for (double t : ticks(yr, 5)) {
    os << R"(<text x=")" << fmt(left - 8) << R"(" y=")" << fmt(py(t) + 4) << R"(" text-anchor="end">)"
       << format_number(t) << "</text>\n";
  }
  os << "</g>\n";

  os << R"(<text class="x-label" x=")" << fmt(left + pw / 2) << R"(" y=")" << fmt(h - 12)
     << R"(" text-anchor="middle">)" << escape(spec.x_label) << "</text>\n";
  os << R"(<text class="y-label" x="16" y=")" << fmt(top + ph / 2) << R"(" text-anchor="middle" transform="rotate(-90 16 )"
     << fmt(top + ph / 2) << R"lit()">)lit" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto color = kPalette[k % std::size(kPalette)];
    os << R"(<polyline class="series" fill="none" stroke=")" << color << R"(" stroke-width="1.5" points=")";
    // Thin very long series to at most ~4000 vertices.
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 4000);
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    }
    os << fmt(px(s.x.back())) << ',' << fmt(py(s.y.back()));
    os << R"("/>)" << '\n';
    if (spec.phase_plane) {
      os << R"(<circle class="start" cx=")" << fmt(px(s.x.front())) << R"(" cy=")" << fmt(py(s.y.front()))
         << R"(" r="3.5" fill=")" << color << R"("/>)" << '\n';
    }
  }

  os << R"(<g class="legend">)" << '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = top + 14 + 18 * static_cast<double>(k);
    const double lx = left + pw + 12;
    os << R"(<line x1=")" << fmt(lx) << R"(" y1=")" << fmt(ly) << R"(" x2=")" << fmt(lx + 22) << R"(" y2=")"
       << fmt(ly) << R"(" stroke=")" << kPalette[k % std::size(kPalette)] << R"(" stroke-width="2"/>)";
    os << R"(<text x=")" << fmt(lx + 28) << R"(" y=")" << fmt(ly + 4) << R"(">)" << escape(series[k].label)
       << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void render_svg(std::span<const Series> series, const std::filesystem::path& path, const PlotSpec& spec) {
  const std::string doc = render_svg(series, spec);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << doc;
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace surgekit
