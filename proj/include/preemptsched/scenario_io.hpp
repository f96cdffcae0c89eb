#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "preemptsched/errors.hpp"
#include "preemptsched/simulator.hpp"

namespace preemptsched {

using json = nlohmann::json;

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + "." + key, "missing required field");
  return *it;
}

inline std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw InputError(path, "expected an integer");
  return v.get<std::int64_t>();
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path, "expected a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError(path, "expected a string");
  return v.get<std::string>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw InputError(path, "expected an array");
  return v;
}

template <typename T, typename Fn>
T optional_field(const json& obj, const char* key, const std::string& path, T fallback, Fn convert) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return convert(*it, path + "." + key);
}

inline InstanceKind parse_kind(const json& v, const std::string& path) {
  const auto text = as_string(v, path);
  try {
    return parse_instance_kind(text);
  } catch (const ContractViolation&) {
    throw InputError(path, "expected \"normal\" or \"preemptible\", got \"" + text + "\"");
  }
}

inline ResourceVector parse_resources(const json& obj, const std::string& path) {
  return {as_int(require(obj, "vcpus", path), path + ".vcpus"), as_int(require(obj, "ram_mb", path), path + ".ram_mb"),
          optional_field<std::int64_t>(obj, "disk_gb", path, 0, as_int)};
}

inline WorkloadParams parse_workload(const json& w, const std::string& path) {
  if (!w.is_object()) throw InputError(path, "expected an object");
  WorkloadParams p;
  p.seed = static_cast<std::uint64_t>(as_int(require(w, "seed", path), path + ".seed"));
  p.preemptible_fraction = optional_field(w, "preemptible_fraction", path, p.preemptible_fraction, as_number);
  p.mean_extra_duration_min = optional_field(w, "mean_duration_min", path, p.mean_extra_duration_min, as_number);
  p.min_duration_min = optional_field<Minutes>(w, "min_duration_min", path, p.min_duration_min, as_int);
  p.max_duration_min = optional_field<Minutes>(w, "max_duration_min", path, p.max_duration_min, as_int);
  if (auto it = w.find("arrival"); it != w.end()) {
    const auto apath = path + ".arrival";
    const auto type = as_string(require(*it, "type", apath), apath + ".type");
    if (type == "fixed") {
      p.arrival.kind = ArrivalProcess::Kind::Fixed;
      p.arrival.interval_min = optional_field<Minutes>(*it, "interval_min", apath, 1, as_int);
    } else if (type == "poisson") {
      p.arrival.kind = ArrivalProcess::Kind::Poisson;
      p.arrival.rate_per_min = as_number(require(*it, "rate_per_min", apath), apath + ".rate_per_min");
    } else {
      throw InputError(apath + ".type", "expected \"fixed\" or \"poisson\"");
    }
  }
  if (auto it = w.find("flavors"); it != w.end()) {
    p.flavors.clear();
    const auto& arr = as_array(*it, path + ".flavors");
    for (std::size_t i = 0; i < arr.size(); ++i)
      p.flavors.push_back(as_string(arr[i], path + ".flavors[" + std::to_string(i) + "]"));
  }
  try {
    validate(p);
  } catch (const ContractViolation& e) {
    throw InputError(path, e.what());
  }
  return p;
}

inline StopRule parse_stop(const json& s, const std::string& path) {
  const auto type = as_string(require(s, "type", path), path + ".type");
  if (type == "first_normal_failure") return {StopRule::Kind::FirstNormalFailure, 0};
  if (type == "request_count") return {StopRule::Kind::RequestCount, as_int(require(s, "n", path), path + ".n")};
  if (type == "sim_time") return {StopRule::Kind::SimTime, as_int(require(s, "t", path), path + ".t")};
  throw InputError(path + ".type", "expected first_normal_failure, request_count or sim_time");
}

}  // namespace detail

/// Parses a scenario document. Missing or malformed fields raise InputError
/// naming the JSON path.
inline Scenario parse_scenario(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw InputError("$", "scenario must be a JSON object");
  Scenario sc;

  if (auto it = doc.find("flavors"); it != doc.end()) {
    FlavorCatalog catalog;
    const auto& arr = as_array(*it, "flavors");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "flavors[" + std::to_string(i) + "]";
      Flavor f{as_string(require(arr[i], "name", path), path + ".name"), parse_resources(arr[i], path)};
      try {
        catalog.add(std::move(f));
      } catch (const ContractViolation& e) {
        throw InputError(path, e.what());
      }
    }
    sc.flavors = std::move(catalog);
  }

  if (auto it = doc.find("hosts"); it != doc.end()) {
    const auto& arr = as_array(*it, "hosts");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "hosts[" + std::to_string(i) + "]";
      HostSpec h{as_string(require(arr[i], "id", path), path + ".id"), parse_resources(arr[i], path)};
      if (h.capacity.vcpus <= 0 || h.capacity.ram_mb <= 0)
        throw InputError(path, "capacity must be positive in vcpus and ram");
      sc.hosts.push_back(std::move(h));
    }
  } else if (auto count = doc.find("host_count"); count != doc.end()) {
    const auto n = as_int(*count, "host_count");
    if (n <= 0) throw InputError("host_count", "must be positive");
    for (const auto& id : make_uniform_cluster(static_cast<std::size_t>(n)).host_ids())
      sc.hosts.push_back({id, kDefaultHostCapacity});
  } else {
    throw InputError("hosts", "missing required field");
  }

  if (auto it = doc.find("instances"); it != doc.end()) {
    const auto& arr = as_array(*it, "instances");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "instances[" + std::to_string(i) + "]";
      const auto& e = arr[i];
      PreloadInstance p;
      p.id = as_string(require(e, "id", path), path + ".id");
      p.host = as_string(require(e, "host", path), path + ".host");
      p.flavor = as_string(require(e, "flavor", path), path + ".flavor");
      p.kind = parse_kind(require(e, "kind", path), path + ".kind");
      p.run_time_min = as_int(require(e, "run_time_min", path), path + ".run_time_min");
      if (p.run_time_min < 0) throw InputError(path + ".run_time_min", "must be >= 0");
      if (auto r = e.find("remaining_min"); r != e.end()) {
        p.remaining_min = as_int(*r, path + ".remaining_min");
        if (*p.remaining_min <= 0) throw InputError(path + ".remaining_min", "must be > 0");
      }
      sc.preload.push_back(std::move(p));
    }
  }

  const bool has_request = doc.contains("request");
  const bool has_workload = doc.contains("workload");
  if (has_request == has_workload) throw InputError("request", "exactly one of 'request' or 'workload' is required");
  if (has_request) {
    const auto& r = doc.at("request");
    ReplayRequest rr;
    rr.flavor = as_string(require(r, "flavor", "request"), "request.flavor");
    rr.kind = parse_kind(require(r, "kind", "request"), "request.kind");
    rr.id = optional_field<std::string>(r, "id", "request", rr.id, as_string);
    sc.workload = rr;
  } else {
    sc.workload = parse_workload(doc.at("workload"), "workload");
  }

  if (auto it = doc.find("scheduler"); it != doc.end()) {
    const auto text = as_string(*it, "scheduler");
    try {
      sc.scheduler = parse_scheduler_kind(text);
    } catch (const ContractViolation&) {
      throw InputError("scheduler", "expected baseline, preemptible_aware or retry, got \"" + text + "\"");
    }
  }
  if (auto it = doc.find("stop"); it != doc.end()) sc.stop = parse_stop(*it, "stop");

  if (auto it = doc.find("cost_fn"); it != doc.end()) {
    sc.cost_fn = as_string(*it, "cost_fn");
    try {
      cost_function_by_name(sc.cost_fn);
    } catch (const NotFoundError& e) {
      throw InputError("cost_fn", e.what());
    }
  }
  if (auto it = doc.find("weighers"); it != doc.end()) {
    const auto& arr = as_array(*it, "weighers");
    const auto cost = cost_function_by_name(sc.cost_fn);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "weighers[" + std::to_string(i) + "]";
      WeigherSetting w{as_string(require(arr[i], "name", path), path + ".name"),
                       optional_field(arr[i], "multiplier", path, 1.0, as_number)};
      if (!std::isfinite(w.multiplier)) throw InputError(path + ".multiplier", "must be finite");
      try {
        weigher_by_name(w.name, w.multiplier, cost);
      } catch (const NotFoundError& e) {
        throw InputError(path + ".name", e.what());
      }
      sc.weighers.push_back(std::move(w));
    }
  }
  if (auto it = doc.find("deterministic_ties"); it != doc.end()) {
    if (!it->is_boolean()) throw InputError("deterministic_ties", "expected a boolean");
    sc.tie_break = it->get<bool>() ? TieBreak::LowestHostId : TieBreak::Random;
  }
  if (auto it = doc.find("seed"); it != doc.end()) sc.seed = static_cast<std::uint64_t>(as_int(*it, "seed"));
  if (auto it = doc.find("max_requests"); it != doc.end()) {
    const auto n = as_int(*it, "max_requests");
    if (n <= 0) throw InputError("max_requests", "must be positive");
    sc.max_requests = static_cast<std::size_t>(n);
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, "cannot open scenario file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

// ---------------------------------------------------------------------------
// Run report output

inline json to_json(const Snapshot& s) {
  json hosts = json::array();
  auto rows = [](const std::vector<SnapshotInstance>& list) {
    json arr = json::array();
    for (const auto& i : list) arr.push_back({{"id", i.id}, {"run_time_min", i.run_time_min}, {"flavor", i.flavor}});
    return arr;
  };
  for (const auto& h : s.hosts)
    hosts.push_back({{"host", h.host}, {"normals", rows(h.normals)}, {"preemptibles", rows(h.preemptibles)}});
  return {{"time", s.time},
          {"request", {{"id", s.request_id}, {"flavor", s.request_flavor}, {"kind", to_string(s.request_kind)}}},
          {"placed_host", s.placed_host.empty() ? json(nullptr) : json(s.placed_host)},
          {"victims", s.victims},
          {"hosts", std::move(hosts)}};
}

inline json to_json(const ScheduleOutcome& outcome) {
  if (const auto* p = placement_of(outcome))
    return {{"placed", true},
            {"host", p->host},
            {"victims", p->victims},
            {"total_weight", p->total_weight},
            {"victim_cost", p->victim_cost}};
  return {{"placed", false}, {"reason", std::get<NoValidHost>(outcome).reason}};
}

inline json to_json(const RunReport& r) {
  const auto& m = r.metrics;
  json report;
  report["scheduler"] = r.scheduler;
  report["metrics"] = {{"arrivals", m.arrivals},
                       {"placed_normal", m.placed_normal},
                       {"placed_preemptible", m.placed_preemptible},
                       {"failed_normal", m.failed_normal},
                       {"failed_preemptible", m.failed_preemptible},
                       {"placements_with_eviction", m.placements_with_eviction},
                       {"preemptions", m.preemptions},
                       {"expiries", m.expiries},
                       {"preemption_cost", m.preemption_cost},
                       {"end_time", m.end_time},
                       {"stop_reason", m.stop_reason}};
  report["snapshots"] = json::array();
  for (const auto& s : r.snapshots) report["snapshots"].push_back(to_json(s));
  report["decisions"] = json::array();
  for (const auto& d : r.decisions)
    report["decisions"].push_back({{"time", d.time},
                                   {"request_id", d.request_id},
                                   {"flavor", d.flavor},
                                   {"kind", to_string(d.kind)},
                                   {"outcome", to_json(d.outcome)}});
  report["events"] = json::array();
  for (const auto& e : r.events)
    report["events"].push_back(
        {{"time", e.time}, {"kind", to_string(e.kind)}, {"id", e.id}, {"host", e.host}, {"detail", e.detail}});
  report["terminations"] = json::array();
  for (const auto& t : r.terminations)
    report["terminations"].push_back({{"time", t.time},
                                      {"instance_id", t.instance_id},
                                      {"host", t.host},
                                      {"run_time_min", t.run_time_min},
                                      {"cost", t.cost}});
  return report;
}

/// Termination rows as CSV: time,instance_id,host,run_time_min,cost.
inline std::string terminations_csv(const std::vector<TerminationEvent>& events) {
  std::ostringstream os;
  os << "time,instance_id,host,run_time_min,cost\n";
  for (const auto& t : events)
    os << t.time << ',' << t.instance_id << ',' << t.host << ',' << t.run_time_min << ',' << json(t.cost).dump()
       << '\n';
  return os.str();
}

}  // namespace preemptsched
