#include "tiersim/engine/knobs.hpp"

#include <array>
#include <limits>

#include "tiersim/error.hpp"

namespace tiersim {

namespace {

constexpr std::array<KnobInfo, 10> kKnobs{{
    {"sampling_period", &KnobConfig::sampling_period, 5000, 100, 10000, false,
     "load events between two read samples"},
    {"write_sampling_period", &KnobConfig::write_sampling_period, 10000, 1000, 20000, false,
     "store events between two write samples"},
    {"read_hot_threshold", &KnobConfig::read_hot_threshold, 8, 1, 30, false,
     "read samples that make a page hot"},
    {"write_hot_threshold", &KnobConfig::write_hot_threshold, 4, 1, 30, false,
     "write samples that make a page hot"},
    {"cooling_threshold", &KnobConfig::cooling_threshold, 18, 4, 40, false,
     "per-page sample count that triggers cooling"},
    {"migration_period_ms", &KnobConfig::migration_period_ms, 10, 10, 5000, true,
     "interval between migration ticks (ms)"},
    {"max_migration_rate_gbps", &KnobConfig::max_migration_rate_gbps, 10, 2, 20, false,
     "migration rate cap (GiB/s)"},
    {"cooling_pages", &KnobConfig::cooling_pages, 8192, 1024, 65536, true,
     "pages cooled per cooling trigger"},
    {"hot_ring_reqs_threshold", &KnobConfig::hot_ring_reqs_threshold, 1024, 128, 4096, false,
     "hot pages processed per tick"},
    {"cold_ring_reqs_threshold", &KnobConfig::cold_ring_reqs_threshold, 32, 8, 256, false,
     "cold pages processed per tick"},
}};

}  // namespace

std::span<const KnobInfo> knob_table() { return kKnobs; }

const KnobInfo* find_knob(std::string_view name) {
  for (const auto& k : kKnobs)
    if (k.name == name) return &k;
  return nullptr;
}

std::string KnobViolation::message() const {
  return knob + " = " + std::to_string(value) + " outside [" + std::to_string(min) + ", " +
         std::to_string(max) + "]";
}

std::vector<KnobViolation> validate_config(const KnobConfig& cfg) {
  std::vector<KnobViolation> out;
  for (const auto& k : kKnobs) {
    const std::uint32_t v = cfg.*k.field;
    if (v < k.min || v > k.max) out.push_back({std::string(k.name), v, k.min, k.max});
  }
  return out;
}

nlohmann::json knobs_to_json(const KnobConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : kKnobs) j[std::string(k.name)] = cfg.*k.field;
  return j;
}

KnobConfig knobs_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "knob config must be a JSON object");
  KnobConfig cfg;
  for (const auto& [key, value] : j.items()) {
    const KnobInfo* k = find_knob(key);
    if (!k) throw Error(ErrorKind::Parse, "unknown knob '" + key + "'");
    if (!value.is_number_integer())
      throw Error(ErrorKind::Parse, "knob '" + key + "' must be an integer");
    const auto v = value.get<std::int64_t>();
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max())
      throw Error(ErrorKind::Parse, "knob '" + key + "' out of representable range");
    cfg.*k->field = static_cast<std::uint32_t>(v);
  }
  return cfg;
}

double tick_byte_cap(const KnobConfig& cfg) {
  return static_cast<double>(cfg.max_migration_rate_gbps) * 1073741824.0 *
         (static_cast<double>(cfg.migration_period_ms) / 1000.0);
}

}  // namespace tiersim
