#include "surgekit/csv.hpp"

#include <cstdio>
#include <fstream>

#include "surgekit/errors.hpp"

namespace surgekit {

namespace {

template <class Writer>
void to_file(const std::filesystem::path& path, Writer&& write) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write(os);
  os.flush();
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 into 0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (const auto& c : traj.columns()) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_number(traj.time(i));
    for (double v : traj.row(i)) os << ',' << format_number(v);
    os << '\n';
  }
}

void write_csv(const Trajectory& traj, const std::filesystem::path& path) {
  to_file(path, [&](std::ostream& os) { write_csv(os, traj); });
}

void write_csv(std::ostream& os, std::span<const StabilityRow> rows) {
  os << "phi,delta,real_part,bendixson_r,class\n";
  for (const auto& r : rows) {
    os << format_number(r.phi) << ',' << format_number(r.discriminant) << ',' << format_number(r.real_part)
       << ',' << format_number(r.bendixson_r) << ',' << to_string(r.classification) << '\n';
  }
}

void write_csv(std::span<const StabilityRow> rows, const std::filesystem::path& path) {
  to_file(path, [&](std::ostream& os) { write_csv(os, rows); });
}

void write_csv(std::ostream& os, std::span<const AveragingRow> rows) {
  os << "k1,k2,k3,gamma,r,lam1,lam2,lam3,verdict\n";
  for (const auto& r : rows) {
    const auto& p = r.point;
    os << format_number(p.k1) << ',' << format_number(p.k2) << ',' << format_number(p.k3) << ','
       << format_number(p.gamma) << ',' << format_number(p.r);
    for (double lam : r.eigenvalues) os << ',' << format_number(lam);
    os << ',' << verdict_label(r.stable) << '\n';
  }
}

void write_csv(std::span<const AveragingRow> rows, const std::filesystem::path& path) {
  to_file(path, [&](std::ostream& os) { write_csv(os, rows); });
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  to_file(path, [&](std::ostream& os) { write_csv(os, table); });
}

}  // namespace surgekit
