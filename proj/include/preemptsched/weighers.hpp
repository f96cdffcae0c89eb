#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "preemptsched/cluster.hpp"
#include "preemptsched/errors.hpp"
#include "preemptsched/reaper.hpp"
#include "preemptsched/request.hpp"

namespace preemptsched {

/// A rank function w(h) and its multiplier m. Raw weights are rescaled into
/// [0, 1] across the candidate hosts before multiplying, so only their
/// relative order within one scheduling call matters.
struct Weigher {
  std::string name;
  double multiplier = 1.0;
  std::function<double(const Request&, const CapacityView& full_view, Minutes now)> raw_weight;
};

/// Affine rescale onto [0, 1]: min maps to 0, max to 1. A constant column
/// maps to all zeros.
inline std::vector<double> normalize(std::span<const double> raw) {
  if (raw.empty()) throw ContractViolation("normalize: empty weight list");
  for (double w : raw)
    if (!std::isfinite(w)) throw ContractViolation("normalize: non-finite weight");
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(raw.size(), 0.0);
  if (hi == lo) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / span;
  return out;
}

/// Ω = Σ mᵢ · N(wᵢ) for one host, given its normalized weights in weigher order.
inline double total_weight(std::span<const double> normalized, std::span<const double> multipliers) {
  if (normalized.size() != multipliers.size())
    throw ContractViolation("total_weight: one normalized weight per multiplier expected");
  double omega = 0.0;
  for (std::size_t i = 0; i < normalized.size(); ++i) omega += multipliers[i] * normalized[i];
  return omega;
}

/// Ω for every candidate host. Each weigher is evaluated over the whole
/// candidate set first since normalization is population-relative.
inline std::vector<double> weigh_hosts(const Request& request, std::span<const CapacityView> full_views,
                                       std::span<const Weigher> weighers, Minutes now) {
  const std::size_t hosts = full_views.size();
  std::vector<double> omega(hosts, 0.0);
  if (hosts == 0) return omega;
  std::vector<double> raw(hosts);
  for (const auto& w : weighers) {
    if (!std::isfinite(w.multiplier)) throw ContractViolation("weigher '" + w.name + "': multiplier not finite");
    for (std::size_t h = 0; h < hosts; ++h) raw[h] = w.raw_weight(request, full_views[h], now);
    const auto norm = normalize(raw);
    for (std::size_t h = 0; h < hosts; ++h) omega[h] += w.multiplier * norm[h];
  }
  return omega;
}

/// -1 when the request does not fit the host's Full-mode free resources in
/// every dimension (placing it would need evictions), else 0.
inline double overcommit_rank(const Request& request, const CapacityView& full_view) {
  return fits_within(request.resources(), full_view.free) ? 0.0 : -1.0;
}

/// Minus the summed partial-hour remainders of every resident preemptible.
/// Normal instances are ignored.
inline double period_rank(const Request&, const CapacityView& full_view, Minutes now) {
  double weight = 0.0;
  for (const auto& inst : full_view.resident_preemptibles) {
    const Minutes remainder = inst.run_time(now) % 60;
    if (remainder > 0) weight += static_cast<double>(remainder);
  }
  return -weight;
}

/// Minus the cost of the cheapest victim set that would make the request fit
/// this host; 0 when it already fits. A host where evicting everything is
/// still not enough scores minus the cost of evicting everything.
inline double victim_cost_rank(const Request& request, const CapacityView& full_view, const CostFunction& cost_fn,
                               Minutes now) {
  if (fits_within(request.resources(), full_view.free)) return 0.0;
  ResourceVector reclaimable = full_view.free;
  double everything = 0.0;
  for (const auto& inst : full_view.resident_preemptibles) {
    reclaimable += inst.resources();
    everything += cost_fn(inst, now);
  }
  if (!fits_within(request.resources(), reclaimable)) return -everything;
  return -select_victims(request.resources(), full_view, cost_fn, now).cost;
}

inline Weigher overcommit_weigher(double multiplier = 1.0) {
  return {"overcommit", multiplier,
          [](const Request& r, const CapacityView& v, Minutes) { return overcommit_rank(r, v); }};
}

inline Weigher period_weigher(double multiplier = 1.0) { return {"period", multiplier, &period_rank}; }

inline Weigher victim_cost_weigher(CostFunction cost_fn, double multiplier = 1.0) {
  return {"victim_cost", multiplier,
          [cost_fn = std::move(cost_fn)](const Request& r, const CapacityView& v, Minutes now) {
            return victim_cost_rank(r, v, cost_fn, now);
          }};
}

/// Resolves a configured weigher name. `victim_cost` ranks with `cost_fn`.
inline Weigher weigher_by_name(const std::string& name, double multiplier, const CostFunction& cost_fn) {
  if (name == "overcommit") return overcommit_weigher(multiplier);
  if (name == "period") return period_weigher(multiplier);
  if (name == "victim_cost") return victim_cost_weigher(cost_fn, multiplier);
  throw NotFoundError("unknown weigher '" + name + "'");
}

/// Overcommit first, then the cost of the cheapest eviction on each host.
inline std::vector<Weigher> default_preemptible_weighers(const CostFunction& cost_fn = partial_hour_cost_fn()) {
  return {overcommit_weigher(1.0), victim_cost_weigher(cost_fn, 1.0)};
}

inline std::vector<Weigher> default_baseline_weighers() { return {overcommit_weigher(1.0)}; }

}  // namespace preemptsched
