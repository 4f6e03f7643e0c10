#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tiersim/sim/machine.hpp"

namespace tiersim {

// Built-in machines: Optane-backed "pmem-large" / "pmem-small" and the
// two-socket "numa" box used to emulate CXL. Capacities are converted to
// pages of `page_size_bytes`.
MachineProfile pmem_large(std::uint64_t page_size_bytes = 4096);
MachineProfile pmem_small(std::uint64_t page_size_bytes = 4096);
MachineProfile numa(std::uint64_t page_size_bytes = 4096);

std::vector<std::string> builtin_profile_names();

// A built-in name or the path of a JSON profile file.
MachineProfile load_profile(std::string_view name_or_path);

MachineProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const MachineProfile& profile);

}  // namespace tiersim
