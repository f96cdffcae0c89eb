#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "preemptsched/errors.hpp"
#include "preemptsched/request.hpp"
#include "preemptsched/resources.hpp"

namespace preemptsched {

struct ArrivalProcess {
  enum class Kind { Fixed, Poisson };
  Kind kind = Kind::Fixed;
  Minutes interval_min = 1;    // Fixed
  double rate_per_min = 1.0;   // Poisson
};

struct WorkloadParams {
  std::uint64_t seed = 0;
  double preemptible_fraction = 0.5;
  // Duration = min_duration + Exp(mean_extra_duration), resampled until it
  // lands at or below max_duration.
  double mean_extra_duration_min = 60.0;
  Minutes min_duration_min = 10;
  Minutes max_duration_min = 300;
  ArrivalProcess arrival;
  // Flavor names drawn uniformly per request.
  std::vector<std::string> flavors{"medium"};
};

inline void validate(const WorkloadParams& p) {
  if (!(p.preemptible_fraction >= 0.0 && p.preemptible_fraction <= 1.0))
    throw ContractViolation("preemptible_fraction must lie in [0, 1]");
  if (!(p.mean_extra_duration_min > 0.0) || !std::isfinite(p.mean_extra_duration_min))
    throw ContractViolation("mean duration must be positive and finite");
  if (p.min_duration_min <= 0 || p.max_duration_min < p.min_duration_min)
    throw ContractViolation("duration bounds must satisfy 0 < min <= max");
  if (p.arrival.kind == ArrivalProcess::Kind::Fixed && p.arrival.interval_min < 0)
    throw ContractViolation("arrival interval must be non-negative");
  if (p.arrival.kind == ArrivalProcess::Kind::Poisson &&
      (!(p.arrival.rate_per_min > 0.0) || !std::isfinite(p.arrival.rate_per_min)))
    throw ContractViolation("arrival rate must be positive and finite");
  if (p.flavors.empty()) throw ContractViolation("workload needs at least one flavor");
}

struct GeneratedRequest {
  Request request;
  Minutes duration = 0;
};

/// Seeded, endless request stream. Same params and catalog give the same
/// sequence.
class WorkloadGenerator {
 public:
  WorkloadGenerator(WorkloadParams params, const FlavorCatalog& catalog, Minutes start_time = 0)
      : params_(std::move(params)), rng_(params_.seed), clock_(static_cast<double>(start_time)) {
    validate(params_);
    for (const auto& name : params_.flavors) flavors_.push_back(catalog.at(name));
  }

  GeneratedRequest next() {
    GeneratedRequest out;
    char id[24];
    std::snprintf(id, sizeof id, "req-%06llu", static_cast<unsigned long long>(++count_));
    out.request.id = id;
    out.request.kind = std::bernoulli_distribution(params_.preemptible_fraction)(rng_) ? InstanceKind::Preemptible
                                                                                       : InstanceKind::Normal;
    const auto pick = std::uniform_int_distribution<std::size_t>(0, flavors_.size() - 1)(rng_);
    out.request.flavor = flavors_[pick];
    out.duration = draw_duration();
    out.request.arrival_time = static_cast<Minutes>(std::floor(clock_));
    advance_clock();
    return out;
  }

 private:
  Minutes draw_duration() {
    std::exponential_distribution<double> extra(1.0 / params_.mean_extra_duration_min);
    for (;;) {
      const auto d = params_.min_duration_min + static_cast<Minutes>(std::llround(extra(rng_)));
      if (d <= params_.max_duration_min) return d;
    }
  }

  void advance_clock() {
    if (params_.arrival.kind == ArrivalProcess::Kind::Fixed) {
      clock_ += static_cast<double>(params_.arrival.interval_min);
    } else {
      clock_ += std::exponential_distribution<double>(params_.arrival.rate_per_min)(rng_);
    }
  }

  WorkloadParams params_;
  std::mt19937_64 rng_;
  std::vector<Flavor> flavors_;
  double clock_;
  std::uint64_t count_ = 0;
};

inline std::vector<GeneratedRequest> generate_workload(const WorkloadParams& params, const FlavorCatalog& catalog,
                                                       std::size_t count, Minutes start_time = 0) {
  WorkloadGenerator gen(params, catalog, start_time);
  std::vector<GeneratedRequest> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen.next());
  return out;
}

}  // namespace preemptsched
