#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "preemptsched/cluster.hpp"
#include "preemptsched/errors.hpp"
#include "preemptsched/reaper.hpp"
#include "preemptsched/request.hpp"
#include "preemptsched/weighers.hpp"

namespace preemptsched {

using Filter = std::function<bool(const Request&, const CapacityView&)>;

/// True iff the flavor fits the view's free resources in every dimension.
inline bool resource_fit_filter(const Request& request, const CapacityView& view) {
  return fits_within(request.resources(), view.free);
}

enum class TieBreak { Random, LowestHostId };

enum class SchedulerKind { Baseline, PreemptibleAware, Retry };

inline const char* to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::Baseline: return "baseline";
    case SchedulerKind::PreemptibleAware: return "preemptible_aware";
    case SchedulerKind::Retry: return "retry";
  }
  return "?";
}

inline SchedulerKind parse_scheduler_kind(const std::string& text) {
  if (text == "baseline") return SchedulerKind::Baseline;
  if (text == "preemptible_aware" || text == "aware") return SchedulerKind::PreemptibleAware;
  if (text == "retry") return SchedulerKind::Retry;
  throw ContractViolation("unknown scheduler '" + text + "'");
}

struct Placement {
  std::string host;
  std::vector<std::string> victims;  // sorted; empty unless the host was overcommitted
  double total_weight = 0.0;
  double victim_cost = 0.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct NoValidHost {
  std::string reason;

  friend bool operator==(const NoValidHost&, const NoValidHost&) = default;
};

using ScheduleOutcome = std::variant<Placement, NoValidHost>;

inline const Placement* placement_of(const ScheduleOutcome& outcome) { return std::get_if<Placement>(&outcome); }

struct SchedulerConfig {
  std::vector<Filter> filters{resource_fit_filter};
  std::vector<Weigher> weighers = default_preemptible_weighers();
  CostFunction cost_fn = partial_hour_cost_fn();
  TieBreak tie_break = TieBreak::Random;

  static SchedulerConfig baseline_defaults() {
    SchedulerConfig c;
    c.weighers = default_baseline_weighers();
    return c;
  }
};

namespace detail {

struct BestHost {
  CapacityView full_view;
  double total_weight = 0.0;
};

inline void require_pipeline(const SchedulerConfig& config) {
  if (config.filters.empty()) throw ContractViolation("scheduler needs at least one filter");
  if (config.weighers.empty()) throw ContractViolation("scheduler needs at least one weigher");
}

/// Filters every host against `filter_mode`, weighs the survivors on their
/// Full views, and returns the highest-Ω host.
template <std::uniform_random_bit_generator Rng>
std::optional<BestHost> select_best_host(const Request& request, const Cluster& cluster,
                                         const SchedulerConfig& config, ViewMode filter_mode, Rng& rng) {
  std::vector<CapacityView> candidates;
  for (const auto& host_id : cluster.host_ids()) {
    CapacityView full;
    bool admitted = true;
    if (filter_mode == ViewMode::Full) {
      full = cluster.view(host_id, ViewMode::Full);
      for (const auto& f : config.filters) admitted = admitted && f(request, full);
    } else {
      auto [f_view, n_view] = cluster.dual_view(host_id);
      for (const auto& f : config.filters) admitted = admitted && f(request, n_view);
      full = std::move(f_view);
    }
    if (admitted) candidates.push_back(std::move(full));
  }
  if (candidates.empty()) return std::nullopt;

  const auto omega = weigh_hosts(request, candidates, config.weighers, cluster.clock());
  const double best = *std::max_element(omega.begin(), omega.end());
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (omega[i] == best) tied.push_back(i);

  std::size_t pick = tied.front();  // hosts are visited in id order
  if (config.tie_break == TieBreak::Random && tied.size() > 1) {
    std::uniform_int_distribution<std::size_t> dist(0, tied.size() - 1);
    pick = tied[dist(rng)];
  }
  return BestHost{std::move(candidates[pick]), best};
}

inline NoValidHost no_valid_host(const Request& request, const char* pass) {
  return {std::string("no host passed filtering for ") + to_string(request.kind) + " request '" + request.id +
          "' (" + pass + ")"};
}

/// Turns the winning host into a Placement, selecting victims if the host is
/// overcommitted.
inline Placement finish_with_eviction(const Request& request, const BestHost& best, const SchedulerConfig& config,
                                      Minutes now) {
  Placement p{best.full_view.host, {}, best.total_weight, 0.0};
  if (fits_within(request.resources(), best.full_view.free)) return p;
  if (request.is_preemptible())
    throw InternalError("preemptible request '" + request.id + "' admitted on overcommitted host '" + p.host + "'");
  auto sel = select_victims(request.resources(), best.full_view, config.cost_fn, now);
  p.victims = std::move(sel.victims);
  p.victim_cost = sel.cost;
  return p;
}

}  // namespace detail

/// Preemption-unaware filter scheduler: filters and weighs on Full views and
/// never proposes victims.
template <std::uniform_random_bit_generator Rng>
ScheduleOutcome schedule_baseline(const Request& request, const Cluster& cluster, const SchedulerConfig& config,
                                  Rng& rng) {
  detail::require_pipeline(config);
  auto best = detail::select_best_host(request, cluster, config, ViewMode::Full, rng);
  if (!best) return detail::no_valid_host(request, "full state");
  return Placement{best->full_view.host, {}, best->total_weight, 0.0};
}

/// Single-pass preemptible-aware scheduler. Normal requests filter on the
/// NormalOnly view, preemptible requests on the Full view; all candidates are
/// weighed on their Full view. If the winner is overcommitted the cheapest
/// victim set on that host is attached to the placement.
template <std::uniform_random_bit_generator Rng>
ScheduleOutcome schedule_preemptible_aware(const Request& request, const Cluster& cluster,
                                           const SchedulerConfig& config, Rng& rng) {
  detail::require_pipeline(config);
  const auto mode = request.is_preemptible() ? ViewMode::Full : ViewMode::NormalOnly;
  auto best = detail::select_best_host(request, cluster, config, mode, rng);
  if (!best) return detail::no_valid_host(request, request.is_preemptible() ? "full state" : "normal-only state");
  return detail::finish_with_eviction(request, *best, config, cluster.clock());
}

/// Two-pass scheduler: a plain Full-view pass, then for normal requests only,
/// a second pass over NormalOnly views with victim selection.
template <std::uniform_random_bit_generator Rng>
ScheduleOutcome schedule_retry(const Request& request, const Cluster& cluster, const SchedulerConfig& config,
                               Rng& rng) {
  detail::require_pipeline(config);
  auto first = schedule_baseline(request, cluster, config, rng);
  if (placement_of(first) || request.is_preemptible()) return first;
  auto best = detail::select_best_host(request, cluster, config, ViewMode::NormalOnly, rng);
  if (!best) return detail::no_valid_host(request, "retry with normal-only state");
  return detail::finish_with_eviction(request, *best, config, cluster.clock());
}

template <std::uniform_random_bit_generator Rng>
ScheduleOutcome schedule(SchedulerKind kind, const Request& request, const Cluster& cluster,
                         const SchedulerConfig& config, Rng& rng) {
  switch (kind) {
    case SchedulerKind::Baseline: return schedule_baseline(request, cluster, config, rng);
    case SchedulerKind::PreemptibleAware: return schedule_preemptible_aware(request, cluster, config, rng);
    case SchedulerKind::Retry: return schedule_retry(request, cluster, config, rng);
  }
  throw ContractViolation("unknown scheduler kind");
}

/// Terminates the placement's victims, then registers the new instance.
/// Returns the termination records.
inline std::vector<TerminationEvent> commit_placement(Cluster& cluster, const Request& request,
                                                      const Placement& placement, const CostFunction& cost_fn,
                                                      std::optional<Minutes> planned_duration = std::nullopt) {
  auto events = terminate(cluster, placement.victims, cost_fn);
  Instance inst;
  inst.id = request.id;
  inst.flavor = request.flavor;
  inst.kind = request.kind;
  inst.host = placement.host;
  inst.start_time = cluster.clock();
  inst.planned_duration = planned_duration;
  cluster.place(std::move(inst));
  return events;
}

}  // namespace preemptsched
