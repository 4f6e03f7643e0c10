#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tiersim {

/// The ten tunable parameters of the tiering engine. Defaults match the
/// stock engine configuration.
struct KnobConfig {
  std::uint32_t sampling_period = 5000;
  std::uint32_t write_sampling_period = 10000;
  std::uint32_t read_hot_threshold = 8;
  std::uint32_t write_hot_threshold = 4;
  std::uint32_t cooling_threshold = 18;
  std::uint32_t migration_period_ms = 10;
  std::uint32_t max_migration_rate_gbps = 10;
  std::uint32_t cooling_pages = 8192;
  std::uint32_t hot_ring_reqs_threshold = 1024;
  std::uint32_t cold_ring_reqs_threshold = 32;

  friend bool operator==(const KnobConfig&, const KnobConfig&) = default;
};

struct KnobInfo {
  std::string_view name;
  std::uint32_t KnobConfig::*field;
  std::uint32_t default_value;
  std::uint32_t min;
  std::uint32_t max;
  // Domains spanning two or more orders of magnitude are searched in log space.
  bool log_scale;
  std::string_view description;
};

std::span<const KnobInfo> knob_table();
const KnobInfo* find_knob(std::string_view name);

struct KnobViolation {
  std::string knob;
  std::int64_t value;
  std::uint32_t min;
  std::uint32_t max;

  std::string message() const;
};

/// Every field outside its [min, max] domain, in table order.
std::vector<KnobViolation> validate_config(const KnobConfig& cfg);

nlohmann::json knobs_to_json(const KnobConfig& cfg);
/// Missing keys keep their defaults; unknown keys and non-integral or negative
/// values are parse errors. Range checking is left to validate_config.
KnobConfig knobs_from_json(const nlohmann::json& j);

/// Byte budget of one migration tick: max_migration_rate_gbps * migration_period.
double tick_byte_cap(const KnobConfig& cfg);

}  // namespace tiersim
