#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "preemptsched/errors.hpp"

namespace preemptsched {

/// Simulated time, in whole minutes.
using Minutes = std::int64_t;

/// vCPUs, RAM (MB) and disk (GB). Components may go negative when reporting
/// an overcommitted host.
struct ResourceVector {
  std::int64_t vcpus = 0;
  std::int64_t ram_mb = 0;
  std::int64_t disk_gb = 0;

  constexpr ResourceVector& operator+=(const ResourceVector& o) {
    vcpus += o.vcpus;
    ram_mb += o.ram_mb;
    disk_gb += o.disk_gb;
    return *this;
  }
  constexpr ResourceVector& operator-=(const ResourceVector& o) {
    vcpus -= o.vcpus;
    ram_mb -= o.ram_mb;
    disk_gb -= o.disk_gb;
    return *this;
  }
  friend constexpr ResourceVector operator+(ResourceVector a, const ResourceVector& b) {
    return a += b;
  }
  friend constexpr ResourceVector operator-(ResourceVector a, const ResourceVector& b) {
    return a -= b;
  }
  friend constexpr bool operator==(const ResourceVector&, const ResourceVector&) = default;

  friend std::ostream& operator<<(std::ostream& os, const ResourceVector& r) {
    return os << "(" << r.vcpus << " vCPU, " << r.ram_mb << " MB, " << r.disk_gb << " GB)";
  }
};

/// Component-wise partial order: every dimension of `a` is at most `b`'s.
constexpr bool fits_within(const ResourceVector& a, const ResourceVector& b) {
  return a.vcpus <= b.vcpus && a.ram_mb <= b.ram_mb && a.disk_gb <= b.disk_gb;
}

constexpr bool is_non_negative(const ResourceVector& r) {
  return fits_within(ResourceVector{}, r);
}

enum class InstanceKind { Normal, Preemptible };

inline const char* to_string(InstanceKind kind) {
  return kind == InstanceKind::Normal ? "normal" : "preemptible";
}

inline InstanceKind parse_instance_kind(const std::string& text) {
  if (text == "normal") return InstanceKind::Normal;
  if (text == "preemptible" || text == "spot") return InstanceKind::Preemptible;
  throw ContractViolation("unknown instance kind '" + text + "'");
}

struct Flavor {
  std::string name;
  ResourceVector resources;

  friend bool operator==(const Flavor&, const Flavor&) = default;
};

/// Named flavors, unique by name. Lookups return stable references.
class FlavorCatalog {
 public:
  FlavorCatalog() = default;
  explicit FlavorCatalog(const std::vector<Flavor>& flavors) {
    for (const auto& f : flavors) add(f);
  }

  void add(Flavor flavor) {
    if (flavor.resources.vcpus < 1)
      throw ContractViolation("flavor '" + flavor.name + "': vcpus must be >= 1");
    if (flavor.resources.ram_mb <= 0)
      throw ContractViolation("flavor '" + flavor.name + "': ram must be > 0");
    if (flavor.resources.disk_gb < 0)
      throw ContractViolation("flavor '" + flavor.name + "': disk must be >= 0");
    auto name = flavor.name;
    if (flavors_.count(name)) throw ContractViolation("duplicate flavor name '" + name + "'");
    flavors_.emplace(std::move(name), std::move(flavor));
  }

  const Flavor& at(const std::string& name) const {
    auto it = flavors_.find(name);
    if (it == flavors_.end()) throw NotFoundError("unknown flavor '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return flavors_.count(name) != 0; }
  std::size_t size() const { return flavors_.size(); }

  std::vector<Flavor> list() const {
    std::vector<Flavor> out;
    out.reserve(flavors_.size());
    for (const auto& [_, f] : flavors_) out.push_back(f);
    return out;
  }

 private:
  std::map<std::string, Flavor> flavors_;
};

// Stock small/medium/large sizes and a 2x quad-core, 16 GB, 140 GB blade.
inline const Flavor kSmall{"small", {1, 2000, 20}};
inline const Flavor kMedium{"medium", {2, 4000, 40}};
inline const Flavor kLarge{"large", {4, 8000, 80}};
inline constexpr ResourceVector kDefaultHostCapacity{8, 16000, 140};

inline FlavorCatalog default_flavor_catalog() { return FlavorCatalog({kSmall, kMedium, kLarge}); }

inline Flavor without_disk(Flavor f) {
  f.resources.disk_gb = 0;
  return f;
}

/// The stock sizes with zero disk demand, so a default host packs four
/// mediums on CPU and RAM alone. Simulation defaults use this catalog.
inline FlavorCatalog testbed_flavor_catalog() {
  return FlavorCatalog({without_disk(kSmall), without_disk(kMedium), without_disk(kLarge)});
}

/// Single-letter size label used in snapshot tables.
inline char size_letter(const std::string& flavor_name) {
  if (flavor_name == "small") return 'S';
  if (flavor_name == "medium") return 'M';
  if (flavor_name == "large") return 'L';
  return '?';
}

}  // namespace preemptsched
