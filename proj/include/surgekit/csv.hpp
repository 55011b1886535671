#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "surgekit/averaging.hpp"
#include "surgekit/ode.hpp"
#include "surgekit/stability.hpp"

namespace surgekit {

/// 9 significant digits, locale-independent.
std::string format_number(double v);

// Header row always present. Path overloads throw IoError.

void write_csv(std::ostream& os, const Trajectory& traj);
void write_csv(const Trajectory& traj, const std::filesystem::path& path);

void write_csv(std::ostream& os, std::span<const StabilityRow> rows);
void write_csv(std::span<const StabilityRow> rows, const std::filesystem::path& path);

void write_csv(std::ostream& os, std::span<const AveragingRow> rows);
void write_csv(std::span<const AveragingRow> rows, const std::filesystem::path& path);

/// Plain numeric table.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv(const CsvTable& table, const std::filesystem::path& path);

}  // namespace surgekit
