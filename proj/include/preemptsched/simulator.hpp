#pragma once

#include <algorithm>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "preemptsched/cluster.hpp"
#include "preemptsched/errors.hpp"
#include "preemptsched/reaper.hpp"
#include "preemptsched/request.hpp"
#include "preemptsched/scheduler.hpp"
#include "preemptsched/weighers.hpp"
#include "preemptsched/workload.hpp"

namespace preemptsched {

/// An instance already running when the scenario starts.
struct PreloadInstance {
  std::string id;
  std::string host;
  std::string flavor;
  InstanceKind kind = InstanceKind::Normal;
  Minutes run_time_min = 0;
  // Minutes left before it finishes on its own; runs forever when unset.
  std::optional<Minutes> remaining_min;
};

/// A single request scheduled once against the preloaded state.
struct ReplayRequest {
  std::string id = "request";
  std::string flavor;
  InstanceKind kind = InstanceKind::Normal;
};

struct StopRule {
  enum class Kind { FirstNormalFailure, RequestCount, SimTime };
  Kind kind = Kind::FirstNormalFailure;
  std::int64_t value = 0;  // request count or simulated minutes
};

struct WeigherSetting {
  std::string name;
  double multiplier = 1.0;
};

struct Scenario {
  std::vector<HostSpec> hosts;
  FlavorCatalog flavors = testbed_flavor_catalog();
  std::vector<PreloadInstance> preload;
  std::variant<WorkloadParams, ReplayRequest> workload = WorkloadParams{};
  SchedulerKind scheduler = SchedulerKind::PreemptibleAware;
  StopRule stop;
  // Empty: the scheduler's default stack.
  std::vector<WeigherSetting> weighers;
  std::string cost_fn = "partial_hour";
  TieBreak tie_break = TieBreak::Random;
  std::uint64_t seed = 0;  // scheduler tie-break stream
  // Hard cap on arrivals so a stop rule that never fires still terminates.
  std::size_t max_requests = 1'000'000;

  bool is_replay() const { return std::holds_alternative<ReplayRequest>(workload); }
};

// Equal timestamps order Expiry < Arrival < Preemption.
enum class EventKind { Expiry = 0, Arrival = 1, Preemption = 2 };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Expiry: return "expiry";
    case EventKind::Arrival: return "arrival";
    case EventKind::Preemption: return "preemption";
  }
  return "?";
}

/// One processed event, as logged in the run report.
struct LoggedEvent {
  Minutes time = 0;
  EventKind kind = EventKind::Arrival;
  std::string id;      // request or instance id
  std::string host;    // placement / residence host; empty on failure
  std::string detail;  // flavor + kind for arrivals, failure reason, ...

  friend bool operator==(const LoggedEvent&, const LoggedEvent&) = default;
};

struct SnapshotInstance {
  std::string id;
  Minutes run_time_min = 0;
  std::string flavor;

  friend bool operator==(const SnapshotInstance&, const SnapshotInstance&) = default;
};

struct SnapshotHost {
  std::string host;
  std::vector<SnapshotInstance> normals;
  std::vector<SnapshotInstance> preemptibles;

  friend bool operator==(const SnapshotHost&, const SnapshotHost&) = default;
};

/// Cluster state at the instant a request triggered (or would trigger)
/// eviction, before any victim is removed.
struct Snapshot {
  Minutes time = 0;
  std::vector<SnapshotHost> hosts;
  std::string request_id;
  std::string request_flavor;
  InstanceKind request_kind = InstanceKind::Normal;
  std::string placed_host;  // empty on NoValidHost
  std::vector<std::string> victims;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

inline Snapshot capture_snapshot(const Cluster& cluster) {
  Snapshot s;
  s.time = cluster.clock();
  for (const auto& id : cluster.host_ids()) {
    SnapshotHost h{id, {}, {}};
    for (const auto& inst : cluster.instances_on(id)) {
      SnapshotInstance row{inst.id, inst.run_time(cluster.clock()), inst.flavor.name};
      (inst.is_preemptible() ? h.preemptibles : h.normals).push_back(std::move(row));
    }
    s.hosts.push_back(std::move(h));
  }
  return s;
}

struct Decision {
  Minutes time = 0;
  std::string request_id;
  std::string flavor;
  InstanceKind kind = InstanceKind::Normal;
  ScheduleOutcome outcome;
};

struct RunMetrics {
  std::int64_t arrivals = 0;
  std::int64_t placed_normal = 0;
  std::int64_t placed_preemptible = 0;
  std::int64_t failed_normal = 0;
  std::int64_t failed_preemptible = 0;
  std::int64_t placements_with_eviction = 0;
  std::int64_t preemptions = 0;
  std::int64_t expiries = 0;
  double preemption_cost = 0.0;
  Minutes end_time = 0;
  std::string stop_reason;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunReport {
  std::string scheduler;
  std::vector<Snapshot> snapshots;
  RunMetrics metrics;
  std::vector<LoggedEvent> events;
  std::vector<Decision> decisions;
  std::vector<TerminationEvent> terminations;
};

/// Optional callbacks for checking invariants while a run progresses.
struct RunObserver {
  // Called with the pre-commit cluster for every scheduling decision.
  std::function<void(const Cluster&, const Request&, const ScheduleOutcome&)> on_decision;
  // Called after each logged event has been applied.
  std::function<void(const Cluster&, const LoggedEvent&)> on_event;
};

inline SchedulerConfig make_scheduler_config(const Scenario& sc) {
  SchedulerConfig cfg = sc.scheduler == SchedulerKind::Baseline ? SchedulerConfig::baseline_defaults()
                                                                 : SchedulerConfig{};
  cfg.cost_fn = cost_function_by_name(sc.cost_fn);
  if (sc.weighers.empty()) {
    if (sc.scheduler != SchedulerKind::Baseline) cfg.weighers = default_preemptible_weighers(cfg.cost_fn);
  } else {
    cfg.weighers.clear();
    for (const auto& w : sc.weighers) cfg.weighers.push_back(weigher_by_name(w.name, w.multiplier, cfg.cost_fn));
  }
  cfg.tie_break = sc.tie_break;
  return cfg;
}

/// Builds the starting cluster. The clock starts at the longest preload run
/// time so every start time is non-negative.
inline Cluster build_initial_cluster(const Scenario& sc) {
  Minutes clock = 0;
  for (const auto& p : sc.preload) {
    if (p.run_time_min < 0) throw InputError("instances." + p.id + ".run_time_min", "must be >= 0");
    clock = std::max(clock, p.run_time_min);
  }
  Cluster cluster;
  for (const auto& h : sc.hosts) cluster.add_host(h);
  cluster.set_clock(clock);
  for (const auto& p : sc.preload) {
    if (!cluster.has_host(p.host)) throw InputError("instances." + p.id + ".host", "unknown host '" + p.host + "'");
    if (!sc.flavors.contains(p.flavor))
      throw InputError("instances." + p.id + ".flavor", "unknown flavor '" + p.flavor + "'");
    Instance inst;
    inst.id = p.id;
    inst.flavor = sc.flavors.at(p.flavor);
    inst.kind = p.kind;
    inst.host = p.host;
    inst.start_time = clock - p.run_time_min;
    if (p.remaining_min) inst.planned_duration = p.run_time_min + *p.remaining_min;
    try {
      cluster.place(std::move(inst));
    } catch (const std::exception& e) {
      throw InputError("instances." + p.id, e.what());
    }
  }
  return cluster;
}

namespace detail {

struct QueuedEvent {
  Minutes time;
  EventKind kind;
  std::string id;

  bool operator>(const QueuedEvent& o) const { return std::tie(time, kind, id) > std::tie(o.time, o.kind, o.id); }
};

}  // namespace detail

/// Runs the scenario to its stop rule. Deterministic for a given scenario.
inline RunReport run(const Scenario& sc, const RunObserver& observer = {}) {
  if (sc.hosts.empty()) throw InputError("hosts", "scenario has no hosts");
  Cluster cluster = build_initial_cluster(sc);
  const SchedulerConfig cfg = make_scheduler_config(sc);
  std::mt19937_64 tie_rng(sc.seed);

  RunReport report;
  report.scheduler = to_string(sc.scheduler);
  auto& m = report.metrics;

  std::priority_queue<detail::QueuedEvent, std::vector<detail::QueuedEvent>, std::greater<>> queue;
  std::map<std::string, GeneratedRequest> pending_arrivals;
  std::set<std::string> pending_expiries;

  auto schedule_expiry = [&](const std::string& id, Minutes at) {
    pending_expiries.insert(id);
    queue.push({at, EventKind::Expiry, id});
  };
  for (const auto& inst : cluster.instances())
    if (inst.planned_duration) schedule_expiry(inst.id, inst.start_time + *inst.planned_duration);

  std::optional<WorkloadGenerator> generator;
  std::size_t issued = 0;
  auto issue_arrival = [&](GeneratedRequest gr) {
    ++issued;
    const auto id = gr.request.id;
    queue.push({gr.request.arrival_time, EventKind::Arrival, id});
    pending_arrivals.emplace(id, std::move(gr));
  };
  std::size_t request_budget = sc.max_requests;
  if (sc.stop.kind == StopRule::Kind::RequestCount) {
    if (sc.stop.value < 0) throw InputError("stop.n", "must be >= 0");
    request_budget = std::min(request_budget, static_cast<std::size_t>(sc.stop.value));
  }

  if (const auto* replay = std::get_if<ReplayRequest>(&sc.workload)) {
    if (!sc.flavors.contains(replay->flavor))
      throw InputError("request.flavor", "unknown flavor '" + replay->flavor + "'");
    GeneratedRequest gr;
    gr.request = {replay->id, sc.flavors.at(replay->flavor), replay->kind, cluster.clock()};
    issue_arrival(std::move(gr));
  } else {
    generator.emplace(std::get<WorkloadParams>(sc.workload), sc.flavors, cluster.clock());
    if (request_budget > 0) issue_arrival(generator->next());
  }

  auto log = [&](LoggedEvent ev) {
    report.events.push_back(std::move(ev));
    if (observer.on_event) observer.on_event(cluster, report.events.back());
  };

  bool halted = false;
  while (!queue.empty() && !halted) {
    const auto ev = queue.top();
    if (sc.stop.kind == StopRule::Kind::SimTime && ev.time > sc.stop.value) {
      m.stop_reason = "sim_time";
      break;
    }
    queue.pop();
    cluster.set_clock(std::max(cluster.clock(), ev.time));

    if (ev.kind == EventKind::Expiry) {
      if (!pending_expiries.erase(ev.id)) continue;  // already preempted
      const auto inst = cluster.remove(ev.id);
      ++m.expiries;
      log({ev.time, EventKind::Expiry, inst.id, inst.host, inst.flavor.name + " " + to_string(inst.kind)});
      continue;
    }

    auto node = pending_arrivals.extract(ev.id);
    GeneratedRequest gr = std::move(node.mapped());
    const Request& req = gr.request;
    if (generator && issued < request_budget) issue_arrival(generator->next());

    ++m.arrivals;
    ScheduleOutcome outcome;
    try {
      outcome = schedule(sc.scheduler, req, cluster, cfg, tie_rng);
    } catch (const std::exception& e) {
      throw InternalError("t=" + std::to_string(ev.time) + " request '" + req.id + "' (" + to_string(req.kind) +
                          " " + req.flavor.name + "): " + e.what());
    }
    if (observer.on_decision) observer.on_decision(cluster, req, outcome);
    report.decisions.push_back({ev.time, req.id, req.flavor.name, req.kind, outcome});

    const auto* placement = placement_of(outcome);
    const bool trigger = !req.is_preemptible() && (!placement || !placement->victims.empty());
    if (sc.is_replay() || (trigger && sc.stop.kind == StopRule::Kind::FirstNormalFailure)) {
      auto snap = capture_snapshot(cluster);
      snap.request_id = req.id;
      snap.request_flavor = req.flavor.name;
      snap.request_kind = req.kind;
      if (placement) {
        snap.placed_host = placement->host;
        snap.victims = placement->victims;
      }
      report.snapshots.push_back(std::move(snap));
    }

    const std::string arrival_detail = req.flavor.name + " " + to_string(req.kind);
    if (!placement) {
      (req.is_preemptible() ? m.failed_preemptible : m.failed_normal)++;
      log({ev.time, EventKind::Arrival, req.id, "", arrival_detail + " failed: " + std::get<NoValidHost>(outcome).reason});
    } else {
      std::optional<Minutes> duration;
      if (generator) duration = gr.duration;
      const auto terminations = commit_placement(cluster, req, *placement, cfg.cost_fn, duration);
      (req.is_preemptible() ? m.placed_preemptible : m.placed_normal)++;
      if (!terminations.empty()) ++m.placements_with_eviction;
      log({ev.time, EventKind::Arrival, req.id, placement->host, arrival_detail});
      for (const auto& t : terminations) {
        pending_expiries.erase(t.instance_id);
        ++m.preemptions;
        m.preemption_cost += t.cost;
        report.terminations.push_back(t);
        std::ostringstream detail;
        detail << "run_time " << t.run_time_min << " cost " << t.cost << " for " << req.id;
        log({t.time, EventKind::Preemption, t.instance_id, t.host, detail.str()});
      }
      if (duration) schedule_expiry(req.id, ev.time + *duration);
    }

    if (sc.is_replay()) {
      m.stop_reason = "replay";
      halted = true;
    } else if (trigger && sc.stop.kind == StopRule::Kind::FirstNormalFailure) {
      m.stop_reason = "first_normal_failure";
      halted = true;
    }
  }
  if (m.stop_reason.empty()) {
    if (sc.stop.kind == StopRule::Kind::RequestCount && static_cast<std::int64_t>(issued) == sc.stop.value)
      m.stop_reason = "request_count";
    else if (issued >= sc.max_requests)
      m.stop_reason = "request_limit";
    else
      m.stop_reason = "queue_empty";
  }
  m.end_time = cluster.clock();
  return report;
}

/// Per-host snapshot table: one row per
/// line, normal instances on the left, preemptible ones on the right, victims
/// flagged with '*'.
inline std::string render_snapshot(const Snapshot& snap) {
  std::ostringstream os;
  auto cell = [](const SnapshotInstance* inst) {
    std::ostringstream c;
    if (inst)
      c << std::left << std::setw(10) << inst->id << std::right << std::setw(6) << inst->run_time_min << "  "
        << size_letter(inst->flavor);
    else
      c << std::string(19, ' ');
    return c.str();
  };
  os << std::left << std::setw(10) << "Host"
     << "| " << std::setw(10) << "ID" << std::right << std::setw(6) << "Time" << "  " << "S"
     << " | " << std::left << std::setw(10) << "PreemptID" << std::right << std::setw(6) << "Time" << "  " << "S"
     << "  Victim\n";
  for (const auto& h : snap.hosts) {
    const std::size_t rows = std::max<std::size_t>(1, std::max(h.normals.size(), h.preemptibles.size()));
    for (std::size_t r = 0; r < rows; ++r) {
      const auto* n = r < h.normals.size() ? &h.normals[r] : nullptr;
      const auto* p = r < h.preemptibles.size() ? &h.preemptibles[r] : nullptr;
      const bool victim =
          p && std::find(snap.victims.begin(), snap.victims.end(), p->id) != snap.victims.end();
      std::string line;
      {
        std::ostringstream l;
        l << std::left << std::setw(10) << (r == 0 ? h.host : "") << "| " << cell(n) << " | " << cell(p) << "  "
          << (victim ? "*" : "");
        line = l.str();
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      os << line << '\n';
    }
  }
  return os.str();
}

}  // namespace preemptsched
