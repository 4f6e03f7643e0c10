#pragma once

#include <span>
#include <vector>

#include "tiersim/sim/machine.hpp"

namespace tiersim::testing {

// Event-by-event contention model used as an oracle for MemoryState. There
// are no epochs: before every access the demand offered to the access's tier
// and direction during the trailing epoch_ns of offered time is summed, and
// the access pays max(1, demand / budget) times its base latency.
class ReferenceSim {
 public:
  ReferenceSim(const MachineProfile& profile, std::vector<Tier> residency, std::uint32_t concurrency);

  // Charged latency of one access.
  double access(PageId page, AccessKind kind, std::uint32_t weight = 1);

  double offered_clock_ns() const { return clock_; }

 private:
  struct Entry {
    double time;
    double bytes;
  };
  struct Window {
    std::vector<Entry> entries;
    std::size_t head = 0;
    double sum = 0.0;
  };

  MachineProfile profile_;
  std::vector<Tier> residency_;
  double concurrency_;
  double clock_ = 0.0;
  Window windows_[2][2];
};

// Sum of charged latencies divided by the concurrency, i.e. the simulated
// time of the trace, under the reference model.
double reference_total_time(const MachineProfile& profile, const std::vector<Tier>& residency,
                            std::span<const MemoryAccess> trace, std::uint32_t concurrency);

}  // namespace tiersim::testing
