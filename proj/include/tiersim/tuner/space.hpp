#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tiersim/engine/knobs.hpp"

namespace tiersim {

/// Search domain of one knob. An empty `values` list means every integer in
/// [min, max]; otherwise the knob is restricted to the listed (sorted) values
/// and encoded by ordinal position.
struct KnobDomain {
  std::string name;
  std::uint32_t KnobConfig::*field = nullptr;
  std::uint32_t min = 0;
  std::uint32_t max = 0;
  bool log_scale = false;
  std::vector<std::uint32_t> values;
};

/// Product of knob domains. Knobs outside the space stay at `base`.
class ParameterSpace {
 public:
  /// All ten engine knobs over their full domains, base = defaults.
  static ParameterSpace full();
  /// The named knobs over their full domains.
  static ParameterSpace of(std::span<const std::string> names, const KnobConfig& base = {});

  ParameterSpace(std::vector<KnobDomain> domains, const KnobConfig& base);

  std::size_t dims() const { return domains_.size(); }
  const std::vector<KnobDomain>& domains() const { return domains_; }
  const KnobConfig& base() const { return base_; }

  /// Restricts a knob of the space to a finite value set.
  void restrict_to(std::string_view name, std::vector<std::uint32_t> values);

  /// Unit-cube coordinates of the config's knobs in this space.
  std::vector<double> normalize(const KnobConfig& cfg) const;
  /// Nearest representable config; coordinates are clamped to [0, 1].
  KnobConfig denormalize(std::span<const double> u) const;

  /// True when every knob of the space holds a representable value and every
  /// other knob equals base.
  bool contains(const KnobConfig& cfg) const;
  /// Human-readable reasons `cfg` is outside the space.
  std::vector<std::string> violations(const KnobConfig& cfg) const;

  KnobConfig random_config(std::mt19937_64& rng) const;

  /// Number of distinct configs, saturating at UINT64_MAX.
  std::uint64_t cardinality() const;

 private:
  std::vector<KnobDomain> domains_;
  KnobConfig base_;
};

/// `n` points of a Latin hypercube in [0,1]^dims: each axis is cut into n
/// strata and every stratum holds exactly one point.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims, std::mt19937_64& rng);

}  // namespace tiersim
