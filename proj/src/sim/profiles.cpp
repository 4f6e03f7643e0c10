#include "tiersim/sim/profiles.hpp"

#include <fstream>

#include "tiersim/error.hpp"

namespace tiersim {

namespace {

constexpr std::uint64_t kGiB = 1ull << 30;

std::uint64_t pages_of(std::uint64_t gib, std::uint64_t page_size) { return gib * kGiB / page_size; }

MachineProfile make(std::string name, std::uint64_t page_size, std::uint64_t near_gib,
                    std::uint64_t far_gib, double near_bw, double far_read_bw, double far_write_bw,
                    double near_lat, double far_lat) {
  MachineProfile p;
  p.name = std::move(name);
  p.page_size_bytes = page_size;
  // Near memory is quoted with a single bandwidth and latency for both directions.
  p.fast = {pages_of(near_gib, page_size), near_lat, near_lat, near_bw, near_bw};
  // Far memory: uncontended charge is the low end of the quoted latency range.
  p.slow = {pages_of(far_gib, page_size), far_lat, far_lat, far_read_bw, far_write_bw};
  return p;
}

TierSpec tier_from_json(const nlohmann::json& j) {
  TierSpec t;
  t.capacity_pages = j.at("capacity_pages").get<std::uint64_t>();
  t.read_latency_ns = j.at("read_latency_ns").get<double>();
  t.write_latency_ns = j.at("write_latency_ns").get<double>();
  t.read_bandwidth_gbps = j.at("read_bandwidth_gbps").get<double>();
  t.write_bandwidth_gbps = j.at("write_bandwidth_gbps").get<double>();
  return t;
}

nlohmann::json tier_to_json(const TierSpec& t) {
  return {{"capacity_pages", t.capacity_pages},
          {"read_latency_ns", t.read_latency_ns},
          {"write_latency_ns", t.write_latency_ns},
          {"read_bandwidth_gbps", t.read_bandwidth_gbps},
          {"write_bandwidth_gbps", t.write_bandwidth_gbps}};
}

}  // namespace

MachineProfile pmem_large(std::uint64_t page_size) {
  return make("pmem-large", page_size, 96, 128, 138.0, 7.45, 2.25, 80.0, 150.0);
}

MachineProfile pmem_small(std::uint64_t page_size) {
  return make("pmem-small", page_size, 32, 128, 46.0, 6.8, 1.85, 80.0, 150.0);
}

MachineProfile numa(std::uint64_t page_size) {
  return make("numa", page_size, 96, 96, 56.0, 36.0, 36.0, 95.0, 145.0);
}

std::vector<std::string> builtin_profile_names() { return {"pmem-large", "pmem-small", "numa"}; }

MachineProfile profile_from_json(const nlohmann::json& j) {
  MachineProfile p;
  try {
    p.name = j.value("name", std::string("custom"));
    p.fast = tier_from_json(j.at("fast"));
    p.slow = tier_from_json(j.at("slow"));
    p.page_size_bytes = j.value("page_size_bytes", p.page_size_bytes);
    p.access_size_bytes = j.value("access_size_bytes", p.access_size_bytes);
    p.epoch_ns = j.value("epoch_ns", p.epoch_ns);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("machine profile: ") + e.what());
  }
  if (auto v = validate_profile(p); !v.empty())
    throw Error(ErrorKind::Validation, "machine profile: " + v.front());
  return p;
}

nlohmann::json profile_to_json(const MachineProfile& p) {
  return {{"name", p.name},
          {"fast", tier_to_json(p.fast)},
          {"slow", tier_to_json(p.slow)},
          {"page_size_bytes", p.page_size_bytes},
          {"access_size_bytes", p.access_size_bytes},
          {"epoch_ns", p.epoch_ns}};
}

MachineProfile load_profile(std::string_view name_or_path) {
  if (name_or_path == "pmem-large") return pmem_large();
  if (name_or_path == "pmem-small") return pmem_small();
  if (name_or_path == "numa") return numa();
  std::ifstream in{std::string(name_or_path)};
  if (!in) throw Error(ErrorKind::Io, "cannot open machine profile '" + std::string(name_or_path) + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("machine profile: ") + e.what());
  }
  return profile_from_json(j);
}

}  // namespace tiersim
