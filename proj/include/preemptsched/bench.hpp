#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "preemptsched/cluster.hpp"
#include "preemptsched/errors.hpp"
#include "preemptsched/scheduler.hpp"

namespace preemptsched {

struct BenchResult {
  std::string scenario;
  std::string scheduler;
  std::size_t sample_count = 0;
  double mean_us = 0.0;
  double stddev_us = 0.0;

  friend bool operator==(const BenchResult&, const BenchResult&) = default;
};

struct BenchConfig {
  std::size_t hosts = 24;
  std::size_t calls = 130;
  std::size_t warmup = 10;
  std::uint64_t seed = 0;
};

/// One (scheduler, scenario) pair of the latency matrix.
struct BenchCell {
  std::string scenario;
  SchedulerKind scheduler = SchedulerKind::Baseline;
  InstanceKind request_kind = InstanceKind::Normal;
  bool saturated = false;
};

inline std::vector<BenchCell> default_bench_cells() {
  using K = SchedulerKind;
  constexpr auto N = InstanceKind::Normal;
  constexpr auto P = InstanceKind::Preemptible;
  return {
      {"empty", K::Baseline, N, false},
      {"normal-empty", K::PreemptibleAware, N, false},
      {"preemptible-empty", K::PreemptibleAware, P, false},
      {"saturated", K::PreemptibleAware, N, true},
      {"normal-empty", K::Retry, N, false},
      {"preemptible-empty", K::Retry, P, false},
      {"saturated", K::Retry, N, true},
  };
}

/// Mean and sample standard deviation of `samples`, in the samples' unit.
inline std::pair<double, double> mean_stddev(const std::vector<double>& samples) {
  if (samples.empty()) throw ContractViolation("mean_stddev needs at least one sample");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

/// Times `calls` invocations of `fn` after `warmup` untimed ones. Each sample
/// covers exactly one call, in microseconds.
template <typename Fn>
std::vector<double> time_calls(Fn&& fn, std::size_t calls, std::size_t warmup) {
  using clock = std::chrono::steady_clock;
  std::size_t sink = 0;
  for (std::size_t i = 0; i < warmup; ++i) sink += fn();
  std::vector<double> out;
  out.reserve(calls);
  for (std::size_t i = 0; i < calls; ++i) {
    const auto t0 = clock::now();
    sink += fn();
    const auto t1 = clock::now();
    out.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  volatile std::size_t keep = sink;
  (void)keep;
  return out;
}

/// Uniform cluster; when `saturated`, every host carries four preemptible
/// mediums with seeded run times, so a normal medium needs one eviction.
inline Cluster make_bench_cluster(std::size_t hosts, bool saturated, std::uint64_t seed) {
  constexpr Minutes kClock = 600;
  Cluster cluster = make_uniform_cluster(hosts, kDefaultHostCapacity);
  cluster.set_clock(kClock);
  if (!saturated) return cluster;
  const Flavor medium = testbed_flavor_catalog().at("medium");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Minutes> run_time(1, kClock);
  std::size_t n = 0;
  for (const auto& host : cluster.host_ids()) {
    for (int k = 0; k < 4; ++k) {
      Instance inst;
      inst.id = "bench-p" + std::to_string(n++);
      inst.flavor = medium;
      inst.kind = InstanceKind::Preemptible;
      inst.host = host;
      inst.start_time = kClock - run_time(rng);
      cluster.place(std::move(inst));
    }
  }
  return cluster;
}

inline SchedulerConfig bench_scheduler_config(SchedulerKind kind) {
  return kind == SchedulerKind::Baseline ? SchedulerConfig::baseline_defaults() : SchedulerConfig{};
}

inline BenchResult run_bench_cell(const BenchCell& cell, const BenchConfig& cfg) {
  if (cfg.calls == 0) throw ContractViolation("bench needs at least one timed call");
  const Cluster cluster = make_bench_cluster(cfg.hosts, cell.saturated, cfg.seed);
  const SchedulerConfig sched = bench_scheduler_config(cell.scheduler);
  const Request request{"bench-request", testbed_flavor_catalog().at("medium"), cell.request_kind, cluster.clock()};
  std::mt19937_64 rng(cfg.seed);
  const auto samples = time_calls(
      [&] {
        const auto outcome = schedule(cell.scheduler, request, cluster, sched, rng);
        const auto* p = placement_of(outcome);
        return p ? p->host.size() + p->victims.size() : std::size_t{0};
      },
      cfg.calls, cfg.warmup);
  const auto [mean, sd] = mean_stddev(samples);
  return {cell.scenario, to_string(cell.scheduler), samples.size(), mean, sd};
}

/// Harness overhead: the same timing loop around a call that does no work.
inline BenchResult run_calibration(const BenchConfig& cfg) {
  const std::function<std::size_t()> noop = [] { return std::size_t{1}; };
  const auto samples = time_calls(noop, cfg.calls, cfg.warmup);
  const auto [mean, sd] = mean_stddev(samples);
  return {"calibration", "empty", samples.size(), mean, sd};
}

/// Runs every cell, sequentially unless `parallel` is set.
inline std::vector<BenchResult> run_bench(const BenchConfig& cfg, bool parallel = false,
                                          const std::vector<BenchCell>& cells = default_bench_cells()) {
  std::vector<BenchResult> out;
  out.reserve(cells.size());
  if (!parallel) {
    // Untimed sweep so the first cell does not absorb cold-start cost.
    BenchConfig prime = cfg;
    prime.calls = 1;
    for (const auto& c : cells) run_bench_cell(c, prime);
    for (const auto& c : cells) out.push_back(run_bench_cell(c, cfg));
    return out;
  }
  std::vector<std::future<BenchResult>> jobs;
  for (const auto& c : cells) jobs.push_back(std::async(std::launch::async, run_bench_cell, c, cfg));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

inline const BenchResult& find_result(const std::vector<BenchResult>& results, const std::string& scheduler,
                                      const std::string& scenario) {
  for (const auto& r : results)
    if (r.scheduler == scheduler && r.scenario == scenario) return r;
  throw NotFoundError("no bench result for " + scheduler + "/" + scenario);
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text, const std::string& field) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw InputError(field, "not a number: '" + text + "'");
  return v;
}

}  // namespace detail

inline constexpr const char* kBenchCsvHeader = "scenario,scheduler,sample_count,mean_us,stddev_us";

/// CSV with shortest round-trip formatting, so parsing reproduces the values
/// bit for bit.
inline std::string bench_csv(const std::vector<BenchResult>& results) {
  std::string out = std::string(kBenchCsvHeader) + "\n";
  for (const auto& r : results)
    out += r.scenario + "," + r.scheduler + "," + std::to_string(r.sample_count) + "," + detail::shortest(r.mean_us) +
           "," + detail::shortest(r.stddev_us) + "\n";
  return out;
}

inline std::vector<BenchResult> parse_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kBenchCsvHeader) throw InputError("csv.header", "unexpected bench CSV header");
  std::vector<BenchResult> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    const auto where = "csv.row" + std::to_string(row);
    if (cols.size() != 5) throw InputError(where, "expected 5 columns");
    BenchResult r;
    r.scenario = cols[0];
    r.scheduler = cols[1];
    std::uint64_t n = 0;
    const auto res = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), n);
    if (res.ec != std::errc{} || res.ptr != cols[2].data() + cols[2].size())
      throw InputError(where + ".sample_count", "not an integer");
    r.sample_count = n;
    r.mean_us = detail::parse_double(cols[3], where + ".mean_us");
    r.stddev_us = detail::parse_double(cols[4], where + ".stddev_us");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<BenchResult> parse_bench_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_bench_csv(in);
}

/// Aligned table, three decimals per latency column.
inline std::string bench_table(const std::vector<BenchResult>& results) {
  std::size_t w_sched = 9, w_scen = 8;
  for (const auto& r : results) {
    w_sched = std::max(w_sched, r.scheduler.size());
    w_scen = std::max(w_scen, r.scenario.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w_sched)) << "scheduler" << "  " << std::setw(static_cast<int>(w_scen))
     << "scenario" << std::right << "  " << std::setw(5) << "n" << "  " << std::setw(12) << "mean_us" << "  "
     << std::setw(12) << "stddev_us" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& r : results)
    os << std::left << std::setw(static_cast<int>(w_sched)) << r.scheduler << "  "
       << std::setw(static_cast<int>(w_scen)) << r.scenario << std::right << "  " << std::setw(5) << r.sample_count
       << "  " << std::setw(12) << r.mean_us << "  " << std::setw(12) << r.stddev_us << '\n';
  return os.str();
}

}  // namespace preemptsched
