#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "preemptsched/cluster.hpp"
#include "preemptsched/errors.hpp"
#include "preemptsched/resources.hpp"

namespace preemptsched {

/// Cost of terminating one preemptible instance at time `now`. A set costs
/// the sum of its members, so the empty set costs 0.
struct CostFunction {
  std::string name;
  std::function<double(const Instance&, Minutes now)> per_instance_cost;

  double operator()(const Instance& inst, Minutes now) const { return per_instance_cost(inst, now); }
};

/// Minutes consumed past the last complete billing hour. Terminating an
/// instance right on an hour boundary wastes nothing the customer paid for.
inline double partial_hour_cost(const Instance& inst, Minutes now) {
  if (!inst.is_preemptible())
    throw ContractViolation("partial_hour_cost: instance '" + inst.id + "' is not preemptible");
  const Minutes run_time = inst.run_time(now);
  if (run_time < 0) throw ContractViolation("partial_hour_cost: instance '" + inst.id + "' starts in the future");
  return static_cast<double>(run_time % 60);
}

inline CostFunction partial_hour_cost_fn() { return {"partial_hour", &partial_hour_cost}; }

/// Every victim costs 1: minimizes the number of terminated instances.
inline CostFunction victim_count_cost_fn() {
  return {"count", [](const Instance&, Minutes) { return 1.0; }};
}

inline CostFunction cost_function_by_name(const std::string& name) {
  if (name == "partial_hour") return partial_hour_cost_fn();
  if (name == "count") return victim_count_cost_fn();
  throw NotFoundError("unknown cost function '" + name + "'");
}

struct VictimSelection {
  std::vector<std::string> victims;  // sorted
  double cost = 0.0;
  ResourceVector freed;
  // Set when the host had too many preemptibles for exact search.
  bool greedy_fallback = false;

  friend bool operator==(const VictimSelection&, const VictimSelection&) = default;
};

/// Exact search handles at most this many resident preemptibles.
inline constexpr std::size_t kMaxExhaustiveVictims = 20;

namespace detail {

struct Candidates {
  std::vector<const Instance*> instances;  // sorted by id
  std::vector<double> costs;

  Candidates(const CapacityView& view, const CostFunction& cost_fn, Minutes now) {
    for (const auto& inst : view.resident_preemptibles) instances.push_back(&inst);
    std::sort(instances.begin(), instances.end(),
              [](const Instance* a, const Instance* b) { return a->id < b->id; });
    costs.reserve(instances.size());
    for (const auto* inst : instances) {
      const double c = cost_fn(*inst, now);
      if (!(c >= 0.0)) throw ContractViolation("cost function '" + cost_fn.name + "' returned a negative cost");
      costs.push_back(c);
    }
  }
  std::size_t size() const { return instances.size(); }
};

inline VictimSelection selection_from_mask(const Candidates& cand, std::uint32_t mask) {
  VictimSelection sel;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (mask & (std::uint32_t{1} << i)) {
      sel.victims.push_back(cand.instances[i]->id);
      sel.cost += cand.costs[i];
      sel.freed += cand.instances[i]->resources();
    }
  }
  return sel;
}

inline void require_preemptible_view(const CapacityView& view) {
  if (view.mode != ViewMode::Full) throw ContractViolation("victim selection needs a Full-mode view");
}

}  // namespace detail

/// Picks the cheapest set of resident preemptibles on the host whose
/// termination makes `demand` fit the Full-mode free resources.
///
/// Ties on cost go to the smaller set, then to the lexicographically smallest
/// sorted id list. Subsets are searched by increasing size in lexicographic
/// order; a branch stops as soon as its partial cost reaches the best cost
/// found so far or its partial set is already feasible (every extension is a
/// superset and so costs at least as much). Hosts with more than
/// kMaxExhaustiveVictims preemptibles fall back to a greedy pass.
inline VictimSelection select_victims(const ResourceVector& demand, const CapacityView& view,
                                      const CostFunction& cost_fn, Minutes now) {
  detail::require_preemptible_view(view);
  if (fits_within(demand, view.free)) return {};

  const detail::Candidates cand(view, cost_fn, now);
  const std::size_t n = cand.size();

  if (n > kMaxExhaustiveVictims) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cand.costs[a] < cand.costs[b]; });
    VictimSelection sel;
    sel.greedy_fallback = true;
    for (auto i : order) {
      sel.victims.push_back(cand.instances[i]->id);
      sel.cost += cand.costs[i];
      sel.freed += cand.instances[i]->resources();
      if (fits_within(demand, view.free + sel.freed)) {
        std::sort(sel.victims.begin(), sel.victims.end());
        return sel;
      }
    }
    throw InternalError("host '" + view.host + "' cannot fit the request even after evicting every preemptible");
  }

  double best_cost = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  bool found = false;

  // Depth-first walk over index combinations of fixed size `k`.
  std::function<void(std::size_t, std::size_t, std::size_t, std::uint32_t, double, ResourceVector)> walk =
      [&](std::size_t k, std::size_t start, std::size_t depth, std::uint32_t mask, double cost,
          ResourceVector freed) {
        if (depth == k) {
          if (fits_within(demand, view.free + freed) && cost < best_cost) {
            best_cost = cost;
            best_mask = mask;
            found = true;
          }
          return;
        }
        for (std::size_t i = start; i + (k - depth) <= n; ++i) {
          const double next_cost = cost + cand.costs[i];
          if (found && next_cost >= best_cost) continue;
          const ResourceVector next_freed = freed + cand.instances[i]->resources();
          const bool partial_feasible = fits_within(demand, view.free + next_freed);
          if (partial_feasible && depth + 1 < k) continue;
          walk(k, i + 1, depth + 1, mask | (std::uint32_t{1} << i), next_cost, next_freed);
        }
      };

  for (std::size_t k = 1; k <= n; ++k) walk(k, 0, 0, 0, 0.0, {});

  if (!found)
    throw InternalError("host '" + view.host + "' cannot fit the request even after evicting every preemptible");
  return detail::selection_from_mask(cand, best_mask);
}

/// Exhaustive power-set scan with the same feasibility and tie-break rules as
/// select_victims. Ground truth for tests; limited to 20 preemptibles.
inline VictimSelection oracle_select_victims(const ResourceVector& demand, const CapacityView& view,
                                             const CostFunction& cost_fn, Minutes now) {
  detail::require_preemptible_view(view);
  const detail::Candidates cand(view, cost_fn, now);
  const std::size_t n = cand.size();
  if (n > kMaxExhaustiveVictims) throw ContractViolation("oracle_select_victims: more than 20 preemptibles");

  std::optional<VictimSelection> best;
  const std::uint32_t limit = std::uint32_t{1} << n;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    auto sel = detail::selection_from_mask(cand, mask);
    if (!fits_within(demand, view.free + sel.freed)) continue;
    if (!best) {
      best = std::move(sel);
      continue;
    }
    const auto sel_size = sel.victims.size();
    const auto best_size = best->victims.size();
    const bool better =
        std::tie(sel.cost, sel_size, sel.victims) < std::tie(best->cost, best_size, best->victims);
    if (better) best = std::move(sel);
  }
  if (!best)
    throw InternalError("host '" + view.host + "' cannot fit the request even after evicting every preemptible");
  return *best;
}

/// Record of one preemptible instance killed to make room.
struct TerminationEvent {
  Minutes time = 0;
  std::string instance_id;
  std::string host;
  Minutes run_time_min = 0;
  double cost = 0.0;

  friend bool operator==(const TerminationEvent&, const TerminationEvent&) = default;
};

/// Removes every victim from the cluster. All ids are validated before the
/// first removal, so a bad id leaves the cluster untouched.
inline std::vector<TerminationEvent> terminate(Cluster& cluster, const std::vector<std::string>& victims,
                                               const CostFunction& cost_fn) {
  std::vector<std::string> seen;
  for (const auto& id : victims) {
    const auto& inst = cluster.instance(id);
    if (!inst.is_preemptible()) throw ContractViolation("cannot terminate normal instance '" + id + "'");
    if (std::find(seen.begin(), seen.end(), id) != seen.end())
      throw ContractViolation("instance '" + id + "' listed twice for termination");
    seen.push_back(id);
  }
  std::vector<TerminationEvent> events;
  events.reserve(victims.size());
  const Minutes now = cluster.clock();
  for (const auto& id : victims) {
    const auto inst = cluster.remove(id);
    events.push_back({now, inst.id, inst.host, inst.run_time(now), cost_fn(inst, now)});
  }
  return events;
}

}  // namespace preemptsched
