#include "tiersim/tuner/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tiersim/error.hpp"

namespace tiersim {

namespace {

KnobDomain domain_of(const KnobInfo& k) {
  return {std::string(k.name), k.field, k.min, k.max, k.log_scale, {}};
}

double encode(const KnobDomain& d, std::uint32_t v) {
  if (!d.values.empty()) {
    if (d.values.size() == 1) return 0.0;
    const auto it = std::lower_bound(d.values.begin(), d.values.end(), v);
    const auto idx = static_cast<double>(std::min<std::ptrdiff_t>(it - d.values.begin(), static_cast<std::ptrdiff_t>(d.values.size() - 1)));
    return idx / static_cast<double>(d.values.size() - 1);
  }
  if (d.max == d.min) return 0.0;
  if (d.log_scale)
    return (std::log(static_cast<double>(v)) - std::log(static_cast<double>(d.min))) /
           (std::log(static_cast<double>(d.max)) - std::log(static_cast<double>(d.min)));
  return (static_cast<double>(v) - d.min) / static_cast<double>(d.max - d.min);
}

std::uint32_t decode(const KnobDomain& d, double u) {
  u = std::clamp(u, 0.0, 1.0);
  if (!d.values.empty()) {
    const auto idx = static_cast<std::size_t>(std::llround(u * static_cast<double>(d.values.size() - 1)));
    return d.values[idx];
  }
  double x;
  if (d.log_scale)
    x = std::exp(std::log(static_cast<double>(d.min)) +
                 u * (std::log(static_cast<double>(d.max)) - std::log(static_cast<double>(d.min))));
  else
    x = d.min + u * static_cast<double>(d.max - d.min);
  const auto r = std::llround(x);
  return static_cast<std::uint32_t>(std::clamp<long long>(r, d.min, d.max));
}

}  // namespace

ParameterSpace ParameterSpace::full() {
  std::vector<KnobDomain> ds;
  for (const auto& k : knob_table()) ds.push_back(domain_of(k));
  return ParameterSpace(std::move(ds), KnobConfig{});
}

ParameterSpace ParameterSpace::of(std::span<const std::string> names, const KnobConfig& base) {
  std::vector<KnobDomain> ds;
  for (const auto& n : names) {
    const KnobInfo* k = find_knob(n);
    if (!k) throw Error(ErrorKind::InvalidArgument, "unknown knob '" + n + "'");
    ds.push_back(domain_of(*k));
  }
  return ParameterSpace(std::move(ds), base);
}

ParameterSpace::ParameterSpace(std::vector<KnobDomain> domains, const KnobConfig& base)
    : domains_(std::move(domains)), base_(base) {
  if (domains_.empty()) throw Error(ErrorKind::InvalidArgument, "parameter space has no knobs");
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    const auto& d = domains_[i];
    if (!d.field) throw Error(ErrorKind::InvalidArgument, "knob '" + d.name + "' has no field");
    if (d.min >= d.max) throw Error(ErrorKind::InvalidArgument, "knob '" + d.name + "' needs min < max");
    if (d.log_scale && d.min == 0) throw Error(ErrorKind::InvalidArgument, "log-scaled knob '" + d.name + "' needs min > 0");
    for (std::size_t j = 0; j < i; ++j)
      if (domains_[j].field == d.field) throw Error(ErrorKind::InvalidArgument, "knob '" + d.name + "' listed twice");
  }
}

void ParameterSpace::restrict_to(std::string_view name, std::vector<std::uint32_t> values) {
  auto it = std::find_if(domains_.begin(), domains_.end(), [&](const KnobDomain& d) { return d.name == name; });
  if (it == domains_.end()) throw Error(ErrorKind::InvalidArgument, "knob '" + std::string(name) + "' is not in the space");
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "empty value list for '" + std::string(name) + "'");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.front() < it->min || values.back() > it->max)
    throw Error(ErrorKind::InvalidArgument, "values for '" + std::string(name) + "' leave its domain");
  it->values = std::move(values);
}

std::vector<double> ParameterSpace::normalize(const KnobConfig& cfg) const {
  std::vector<double> u(domains_.size());
  for (std::size_t i = 0; i < domains_.size(); ++i) u[i] = encode(domains_[i], cfg.*domains_[i].field);
  return u;
}

KnobConfig ParameterSpace::denormalize(std::span<const double> u) const {
  if (u.size() != domains_.size()) throw Error(ErrorKind::InvalidArgument, "coordinate count does not match the space");
  KnobConfig cfg = base_;
  for (std::size_t i = 0; i < domains_.size(); ++i) cfg.*domains_[i].field = decode(domains_[i], u[i]);
  return cfg;
}

std::vector<std::string> ParameterSpace::violations(const KnobConfig& cfg) const {
  std::vector<std::string> out;
  for (const auto& k : knob_table()) {
    const auto d = std::find_if(domains_.begin(), domains_.end(), [&](const KnobDomain& x) { return x.field == k.field; });
    const std::uint32_t v = cfg.*k.field;
    if (d == domains_.end()) {
      if (v != base_.*k.field)
        out.push_back(std::string(k.name) + " = " + std::to_string(v) + " but is fixed at " + std::to_string(base_.*k.field));
    } else if (!d->values.empty()) {
      if (!std::binary_search(d->values.begin(), d->values.end(), v))
        out.push_back(std::string(k.name) + " = " + std::to_string(v) + " is not one of the allowed values");
    } else if (v < d->min || v > d->max) {
      out.push_back(std::string(k.name) + " = " + std::to_string(v) + " outside [" + std::to_string(d->min) + ", " +
                    std::to_string(d->max) + "]");
    }
  }
  return out;
}

bool ParameterSpace::contains(const KnobConfig& cfg) const { return violations(cfg).empty(); }

KnobConfig ParameterSpace::random_config(std::mt19937_64& rng) const {
  KnobConfig cfg = base_;
  for (const auto& d : domains_) {
    if (!d.values.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, d.values.size() - 1);
      cfg.*d.field = d.values[pick(rng)];
    } else if (d.log_scale) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      cfg.*d.field = decode(d, unit(rng));
    } else {
      std::uniform_int_distribution<std::uint32_t> pick(d.min, d.max);
      cfg.*d.field = pick(rng);
    }
  }
  return cfg;
}

std::uint64_t ParameterSpace::cardinality() const {
  std::uint64_t n = 1;
  for (const auto& d : domains_) {
    const std::uint64_t m = d.values.empty() ? std::uint64_t{d.max} - d.min + 1 : d.values.size();
    if (n > std::numeric_limits<std::uint64_t>::max() / m) return std::numeric_limits<std::uint64_t>::max();
    n *= m;
  }
  return n;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims, std::mt19937_64& rng) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i)
      pts[i][d] = (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(n);
  }
  return pts;
}

}  // namespace tiersim
