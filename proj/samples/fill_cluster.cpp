// Fills a small cluster with preemptible work, then places normal requests
// and prints which preemptibles each one displaces.

#include <iostream>
#include <random>

#include "preemptsched/scheduler.hpp"

namespace ps = preemptsched;

int main() {
  auto cluster = ps::make_uniform_cluster(3);
  cluster.set_clock(240);
  const auto catalog = ps::testbed_flavor_catalog();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<ps::Minutes> run_time(1, 240);

  ps::SchedulerConfig cfg;
  for (int i = 0; i < 12; ++i) {
    const ps::Request req{"spot-" + std::to_string(i), catalog.at("medium"), ps::InstanceKind::Preemptible, 0};
    const auto out = ps::schedule_preemptible_aware(req, cluster, cfg, rng);
    const auto* p = ps::placement_of(out);
    if (!p) break;
    ps::commit_placement(cluster, req, *p, cfg.cost_fn);
    cluster.remove(req.id);  // re-place with a random age
    ps::Instance inst{req.id, req.flavor, req.kind, p->host, cluster.clock() - run_time(rng), std::nullopt};
    cluster.place(inst);
  }

  for (int i = 0; i < 4; ++i) {
    const ps::Request req{"vm-" + std::to_string(i), catalog.at(i % 2 ? "large" : "medium"), ps::InstanceKind::Normal,
                          cluster.clock()};
    const auto out = ps::schedule_preemptible_aware(req, cluster, cfg, rng);
    const auto* p = ps::placement_of(out);
    if (!p) {
      std::cout << req.id << ": " << std::get<ps::NoValidHost>(out).reason << '\n';
      continue;
    }
    std::cout << req.id << " (" << req.flavor.name << ") -> " << p->host << ", evicting";
    for (const auto& v : p->victims) std::cout << ' ' << v << " [" << cluster.instance(v).run_time(cluster.clock()) << " min]";
    std::cout << ", cost " << p->victim_cost << '\n';
    ps::commit_placement(cluster, req, *p, cfg.cost_fn);
  }
}
