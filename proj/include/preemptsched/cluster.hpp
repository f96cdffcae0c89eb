#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "preemptsched/errors.hpp"
#include "preemptsched/resources.hpp"

namespace preemptsched {

struct Instance {
  std::string id;
  Flavor flavor;
  InstanceKind kind = InstanceKind::Normal;
  std::string host;
  Minutes start_time = 0;
  // Known to the simulator only; the scheduler never reads it.
  std::optional<Minutes> planned_duration;

  bool is_preemptible() const { return kind == InstanceKind::Preemptible; }
  const ResourceVector& resources() const { return flavor.resources; }
  Minutes run_time(Minutes now) const { return now - start_time; }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct HostSpec {
  std::string id;
  ResourceVector capacity;
};

/// Two capacity-accounting modes for a host.
///  - Full: every resident instance consumes capacity.
///  - NormalOnly: resident preemptibles are ignored, exposing capacity that
///    eviction could reclaim.
enum class ViewMode { Full, NormalOnly };

struct CapacityView {
  std::string host;
  ViewMode mode = ViewMode::Full;
  ResourceVector capacity;
  ResourceVector free;
  // Sorted by instance id.
  std::vector<Instance> resident_preemptibles;
  std::vector<Instance> resident_normals;
};

/// In-memory registry of hosts and instances. Single writer; views are
/// computed on demand and never cached.
class Cluster {
 public:
  Cluster() = default;
  explicit Cluster(std::vector<HostSpec> hosts, Minutes clock = 0) : clock_(clock) {
    for (auto& h : hosts) add_host(std::move(h));
  }

  void add_host(HostSpec host) {
    if (host.capacity.vcpus <= 0 || host.capacity.ram_mb <= 0)
      throw ContractViolation("host '" + host.id + "': capacity must be positive in vcpus and ram");
    if (hosts_.count(host.id)) throw ConsistencyError("duplicate host id '" + host.id + "'");
    auto id = host.id;
    hosts_.emplace(id, HostEntry{std::move(host), {}});
  }

  Minutes clock() const { return clock_; }
  void set_clock(Minutes now) {
    if (now < clock_) throw ContractViolation("clock cannot move backwards");
    clock_ = now;
  }

  /// Host ids in lexicographic order.
  std::vector<std::string> host_ids() const {
    std::vector<std::string> ids;
    ids.reserve(hosts_.size());
    for (const auto& [id, _] : hosts_) ids.push_back(id);
    return ids;
  }
  std::size_t host_count() const { return hosts_.size(); }
  bool has_host(const std::string& id) const { return hosts_.count(id) != 0; }

  const HostSpec& host(const std::string& id) const { return host_entry(id).spec; }

  bool has_instance(const std::string& id) const { return instances_.count(id) != 0; }
  std::size_t instance_count() const { return instances_.size(); }

  const Instance& instance(const std::string& id) const {
    auto it = instances_.find(id);
    if (it == instances_.end()) throw NotFoundError("unknown instance '" + id + "'");
    return it->second;
  }

  /// All instances, ordered by id.
  std::vector<Instance> instances() const {
    std::vector<Instance> out;
    out.reserve(instances_.size());
    for (const auto& [_, inst] : instances_) out.push_back(inst);
    return out;
  }

  /// Instances resident on `host_id`, ordered by id.
  std::vector<Instance> instances_on(const std::string& host_id) const {
    const auto& entry = host_entry(host_id);
    std::vector<Instance> out;
    out.reserve(entry.residents.size());
    for (const auto& id : entry.residents) out.push_back(instances_.at(id));
    return out;
  }

  CapacityView view(const std::string& host_id, ViewMode mode) const {
    const auto& entry = host_entry(host_id);
    CapacityView v;
    v.host = host_id;
    v.mode = mode;
    v.capacity = entry.spec.capacity;
    v.free = entry.spec.capacity;
    for (const auto& id : entry.residents) {
      const auto& inst = instances_.at(id);
      if (inst.is_preemptible()) {
        v.resident_preemptibles.push_back(inst);
        if (mode == ViewMode::Full) v.free -= inst.resources();
      } else {
        v.resident_normals.push_back(inst);
        v.free -= inst.resources();
      }
    }
    return v;
  }

  /// Full and NormalOnly views of one host from a single pass over its residents.
  std::pair<CapacityView, CapacityView> dual_view(const std::string& host_id) const {
    auto full = view(host_id, ViewMode::Full);
    CapacityView normal_only;
    normal_only.host = full.host;
    normal_only.mode = ViewMode::NormalOnly;
    normal_only.capacity = full.capacity;
    normal_only.free = full.free;
    for (const auto& inst : full.resident_preemptibles) normal_only.free += inst.resources();
    normal_only.resident_preemptibles = full.resident_preemptibles;
    normal_only.resident_normals = full.resident_normals;
    return {std::move(full), std::move(normal_only)};
  }

  /// Registers `inst` on its host. The host's Full-mode free must stay
  /// non-negative, so victims have to be removed first.
  void place(Instance inst) {
    if (instances_.count(inst.id)) throw ConsistencyError("duplicate instance id '" + inst.id + "'");
    auto& entry = host_entry(inst.host);
    if (inst.start_time < 0) throw ContractViolation("instance '" + inst.id + "': negative start time");
    if (inst.planned_duration && *inst.planned_duration <= 0)
      throw ContractViolation("instance '" + inst.id + "': planned duration must be positive");
    auto after = view(inst.host, ViewMode::Full).free - inst.resources();
    if (!is_non_negative(after))
      throw ConsistencyError("placing '" + inst.id + "' on '" + inst.host +
                             "' would overcommit the host (free after placement " + to_text(after) + ")");
    entry.residents.insert(inst.id);
    auto id = inst.id;
    instances_.emplace(std::move(id), std::move(inst));
  }

  /// Removes and returns the instance.
  Instance remove(const std::string& instance_id) {
    auto it = instances_.find(instance_id);
    if (it == instances_.end()) throw NotFoundError("unknown instance '" + instance_id + "'");
    Instance out = std::move(it->second);
    instances_.erase(it);
    hosts_.at(out.host).residents.erase(instance_id);
    return out;
  }

 private:
  struct HostEntry {
    HostSpec spec;
    std::set<std::string> residents;
  };

  static std::string to_text(const ResourceVector& r) {
    return "(" + std::to_string(r.vcpus) + ", " + std::to_string(r.ram_mb) + ", " +
           std::to_string(r.disk_gb) + ")";
  }

  const HostEntry& host_entry(const std::string& id) const {
    auto it = hosts_.find(id);
    if (it == hosts_.end()) throw NotFoundError("unknown host '" + id + "'");
    return it->second;
  }
  HostEntry& host_entry(const std::string& id) {
    auto it = hosts_.find(id);
    if (it == hosts_.end()) throw NotFoundError("unknown host '" + id + "'");
    return it->second;
  }

  std::map<std::string, HostEntry> hosts_;
  std::map<std::string, Instance> instances_;
  Minutes clock_ = 0;
};

/// A uniform cluster of `count` hosts named host-00, host-01, ...
inline Cluster make_uniform_cluster(std::size_t count, ResourceVector capacity = kDefaultHostCapacity) {
  Cluster c;
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count > 0 ? count - 1 : 0).size());
  for (std::size_t i = 0; i < count; ++i) {
    auto num = std::to_string(i);
    if (num.size() < width) num.insert(0, width - num.size(), '0');
    c.add_host({"host-" + num, capacity});
  }
  return c;
}

}  // namespace preemptsched
