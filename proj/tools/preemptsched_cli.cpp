#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "preemptsched/bench.hpp"
#include "preemptsched/scenario_io.hpp"
#include "preemptsched/simulator.hpp"

namespace ps = preemptsched;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kSchedulingFailure = 2;

struct Globals {
  bool deterministic_ties = false;
  std::optional<std::uint64_t> seed;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ps::InputError(path, "cannot open for writing");
  out << text;
}

std::string join(const std::vector<std::string>& ids) {
  std::string s = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? ", " : "") + ids[i];
  return s + "}";
}

void apply_globals(ps::Scenario& sc, const Globals& g) {
  if (g.deterministic_ties) sc.tie_break = ps::TieBreak::LowestHostId;
  if (g.seed) {
    sc.seed = *g.seed;
    if (auto* w = std::get_if<ps::WorkloadParams>(&sc.workload)) w->seed = *g.seed;
  }
}

int cmd_simulate(const std::string& path, const std::string& out_path, const std::string& csv_path, bool tables,
                 const Globals& g) {
  auto sc = ps::load_scenario(path);
  apply_globals(sc, g);
  const auto report = ps::run(sc);
  const auto doc = ps::to_json(report).dump(2) + "\n";
  if (out_path.empty())
    std::cout << doc;
  else
    write_text(out_path, doc);
  if (!csv_path.empty()) write_text(csv_path, ps::terminations_csv(report.terminations));
  if (tables)
    for (const auto& snap : report.snapshots) std::cout << ps::render_snapshot(snap) << '\n';

  if (sc.is_replay() && !report.decisions.empty() && !ps::placement_of(report.decisions.front().outcome)) {
    std::cerr << "no valid host: " << std::get<ps::NoValidHost>(report.decisions.front().outcome).reason << '\n';
    return kSchedulingFailure;
  }
  return kOk;
}

int cmd_replay_tables(const std::string& dir, const Globals& g) {
  if (!fs::is_directory(dir)) throw ps::InputError(dir, "fixture directory not found");
  bool all_match = true;
  for (const char* name : {"test1", "test2", "test3", "test4"}) {
    const auto path = (fs::path(dir) / (std::string(name) + ".json")).string();
    std::ifstream in(path);
    if (!in) throw ps::InputError(path, "fixture missing");
    ps::json doc;
    try {
      doc = ps::json::parse(in);
    } catch (const ps::json::parse_error& e) {
      throw ps::InputError(path, std::string("invalid JSON: ") + e.what());
    }
    auto sc = ps::parse_scenario(doc);
    if (!sc.is_replay()) throw ps::InputError(path + ": request", "fixture must hold a single request");
    const auto& expect = ps::detail::require(doc, "expect", path);
    const auto expected_host = ps::detail::as_string(ps::detail::require(expect, "host", "expect"), "expect.host");
    std::vector<std::string> expected_victims;
    for (const auto& v : ps::detail::as_array(ps::detail::require(expect, "victims", "expect"), "expect.victims"))
      expected_victims.push_back(ps::detail::as_string(v, "expect.victims"));
    std::sort(expected_victims.begin(), expected_victims.end());

    sc.tie_break = ps::TieBreak::LowestHostId;
    apply_globals(sc, g);
    const auto report = ps::run(sc);
    const auto& snap = report.snapshots.at(0);
    const bool match = snap.placed_host == expected_host && snap.victims == expected_victims;
    all_match = all_match && match;
    std::cout << name << ": " << (match ? "PASS" : "FAIL") << "\n  expected " << expected_host << ' '
              << join(expected_victims) << "\n  actual   " << (snap.placed_host.empty() ? "<none>" : snap.placed_host)
              << ' ' << join(snap.victims) << '\n'
              << ps::render_snapshot(snap) << '\n';
  }
  std::cout << (all_match ? "all tables match\n" : "table mismatch\n");
  return all_match ? kOk : kInputError;
}

int cmd_bench(const ps::BenchConfig& cfg, const std::string& csv_path, bool parallel) {
  if (cfg.hosts == 0) throw ps::InputError("--hosts", "must be positive");
  if (cfg.calls == 0) throw ps::InputError("--calls", "must be positive");
  const auto calibration = ps::run_calibration(cfg);
  const auto results = ps::run_bench(cfg, parallel);
  std::cout << ps::bench_table(results);
  std::cout << "calibration (empty call): mean " << calibration.mean_us << " us over " << calibration.sample_count
            << " calls\n";
  if (!csv_path.empty()) write_text(csv_path, ps::bench_csv(results));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preemptible-instance-aware scheduler: simulation, table replay and latency bench"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  app.add_flag("--deterministic-ties", g.deterministic_ties, "Break weight ties by lowest host id");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for tie-breaking, workloads and bench preload")
                       ->envname("PREEMPTSCHED_SEED");

  std::string scenario_path, out_path, csv_path;
  bool tables = false;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario file and write the run report");
  simulate->add_option("scenario", scenario_path, "Scenario JSON")->required();
  simulate->add_option("-o,--out", out_path, "Report path (default: stdout)");
  simulate->add_option("--csv", csv_path, "Write termination events as CSV");
  simulate->add_flag("--tables", tables, "Print snapshot tables");

  std::string fixture_dir = PREEMPTSCHED_FIXTURE_DIR;
  auto* replay = app.add_subcommand("replay-tables", "Replay the reference snapshot fixtures");
  replay->add_option("--fixtures", fixture_dir, "Directory holding test1.json .. test4.json");

  ps::BenchConfig bench_cfg;
  std::string bench_csv_path;
  bool parallel = false;
  auto* bench = app.add_subcommand("bench", "Time scheduling decisions per scheduler and scenario");
  bench->add_option("--hosts", bench_cfg.hosts, "Hosts per synthetic cluster");
  bench->add_option("--calls", bench_cfg.calls, "Timed calls per cell");
  bench->add_option("--warmup", bench_cfg.warmup, "Untimed calls before timing");
  bench->add_option("--csv", bench_csv_path, "Write results as CSV");
  bench->add_flag("--parallel-cells", parallel, "Run cells concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (simulate->parsed()) return cmd_simulate(scenario_path, out_path, csv_path, tables, g);
    if (replay->parsed()) return cmd_replay_tables(fixture_dir, g);
    if (g.seed) bench_cfg.seed = *g.seed;
    return cmd_bench(bench_cfg, bench_csv_path, parallel);
  } catch (const ps::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ps::NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
