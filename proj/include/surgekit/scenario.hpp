#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgekit/averaging.hpp"
#include "surgekit/compressor.hpp"
#include "surgekit/control.hpp"

namespace surgekit {

enum class ScenarioKind { map, stability, simulate, limit_cycle, tune, closedloop, averaging };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view text);

enum class ValueType { number, integer, boolean, text };

/// One recognised configuration key. An empty default marks the key as
/// optional (unset unless the file or a flag provides it).
struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view default_value;
  std::string_view doc;
};

/// Every key a scenario file may contain, with defaults and one-line docs.
std::span<const KeySpec> scenario_keys();

/// Named, typed key/value configuration for one run.
///
/// Values are stored as text and checked against their KeySpec type on
/// set(); typed getters fall back to the documented default.
class Scenario {
 public:
  Scenario();

  std::string name() const { return text("name"); }
  ScenarioKind kind() const;

  // Throws ConfigError for unknown keys or values that do not parse as the
  // key's type. `line` is reported in the message when non-zero.
  void set(std::string_view key, std::string_view value, int line = 0);
  bool is_set(std::string_view key) const;

  double number(std::string_view key) const;
  std::optional<double> optional_number(std::string_view key) const;
  long long integer(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::string text(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& explicit_values() const { return values_; }

 private:
  std::string raw(std::string_view key) const;
  std::map<std::string, std::string, std::less<>> values_;
};

/// `key = value` lines, `#` comments, `[section]` headers prefixing
/// subsequent keys with "section.". Top-level keys may also be dotted.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Resolves a catalog name ("fig14") or a path to a scenario file. Catalog
/// directory: $SURGEKIT_SCENARIO_DIR, else the directory baked in at build time.
std::filesystem::path find_scenario(std::string_view name_or_path);
std::filesystem::path scenario_catalog_dir();

// Builders translate a scenario into module configuration, validating each
// value against the owning module's preconditions and naming the key on
// failure (ConfigError).

CompressorMap map_from(const Scenario& s);
GreitzerParams greitzer_from(const Scenario& s);
ClosedLoopScenario closed_loop_from(const Scenario& s);
AveragedPoint averaged_base_from(const Scenario& s);

struct IntegrationSettings {
  double dt = 0.0;
  double t_end = 0.0;
  std::size_t decimate = 1;
};
IntegrationSettings integration_from(const Scenario& s);

/// Initial state and throttle for open-loop surge-model runs.
struct PlantRun {
  GreitzerParams params;
  PlantState equilibrium;
  PlantState initial;
};
PlantRun plant_run_from(const Scenario& s);

/// Lag time constants listed in tune.lags (empty when unset).
std::vector<double> tune_lags(const Scenario& s);

/// Checks every key the scenario's kind will read; throws ConfigError before
/// any computation starts.
void validate_scenario(const Scenario& s);

}  // namespace surgekit
