#include <gtest/gtest.h>

#include <random>

#include "preemptsched/cluster.hpp"
#include "support/snapshot_tables.hpp"

namespace preemptsched {
namespace {

using testing::make_instance;

const Flavor kMediumNoDisk = without_disk(kMedium);

Cluster default_host() { return Cluster({{"h", kDefaultHostCapacity}}, 1000); }

TEST(ClusterView, DualAccountingOnMixedHost) {
  auto c = default_host();
  c.place(make_instance("n1", kMediumNoDisk, InstanceKind::Normal, "h", 10, 1000));
  c.place(make_instance("n2", kMediumNoDisk, InstanceKind::Normal, "h", 10, 1000));
  c.place(make_instance("p1", kMediumNoDisk, InstanceKind::Preemptible, "h", 10, 1000));
  c.place(make_instance("p2", kMediumNoDisk, InstanceKind::Preemptible, "h", 10, 1000));

  // 8 - 4*2 vCPU, 16000 - 4*4000 MB; normal-only leaves two mediums' worth.
  const auto full = c.view("h", ViewMode::Full);
  EXPECT_EQ(full.free.vcpus, 0);
  EXPECT_EQ(full.free.ram_mb, 0);
  const auto normal = c.view("h", ViewMode::NormalOnly);
  EXPECT_EQ(normal.free.vcpus, 4);
  EXPECT_EQ(normal.free.ram_mb, 8000);
  EXPECT_EQ(normal.free.disk_gb, 140);
  ASSERT_EQ(full.resident_preemptibles.size(), 2u);
  EXPECT_EQ(full.resident_preemptibles[0].id, "p1");
}

TEST(ClusterView, EmptyHostShowsCapacityInBothModes) {
  auto c = default_host();
  EXPECT_EQ(c.view("h", ViewMode::Full).free, kDefaultHostCapacity);
  EXPECT_EQ(c.view("h", ViewMode::NormalOnly).free, kDefaultHostCapacity);
}

TEST(ClusterView, UnknownHostIsNotFound) {
  auto c = default_host();
  EXPECT_THROW(c.view("nope", ViewMode::Full), NotFoundError);
}

TEST(ClusterView, DualViewMatchesSingleViews) {
  auto c = testing::build_cluster(testing::snapshot_tables()[2]);
  for (const auto& id : c.host_ids()) {
    auto [full, normal] = c.dual_view(id);
    EXPECT_EQ(full.free, c.view(id, ViewMode::Full).free);
    EXPECT_EQ(normal.free, c.view(id, ViewMode::NormalOnly).free);
  }
}

TEST(ClusterPlace, MediumOnEmptyHost) {
  auto c = default_host();
  c.place(make_instance("m", kMedium, InstanceKind::Normal, "h", 0, 1000));
  EXPECT_EQ(c.view("h", ViewMode::Full).free, (ResourceVector{6, 12000, 100}));
}

TEST(ClusterPlace, FourMediumsFillTheHost) {
  auto c = default_host();
  for (int i = 0; i < 4; ++i)
    c.place(make_instance("m" + std::to_string(i), kMediumNoDisk, InstanceKind::Normal, "h", 0, 1000));
  const auto free = c.view("h", ViewMode::Full).free;
  EXPECT_EQ(free.vcpus, 0);
  EXPECT_EQ(free.ram_mb, 0);
  EXPECT_THROW(c.place(make_instance("m4", kMediumNoDisk, InstanceKind::Normal, "h", 0, 1000)), ConsistencyError);
}

TEST(ClusterPlace, RejectsDuplicateIdAndUnknownHost) {
  auto c = default_host();
  c.place(make_instance("a", kSmall, InstanceKind::Normal, "h", 0, 1000));
  EXPECT_THROW(c.place(make_instance("a", kSmall, InstanceKind::Normal, "h", 0, 1000)), ConsistencyError);
  EXPECT_THROW(c.place(make_instance("b", kSmall, InstanceKind::Normal, "x", 0, 1000)), NotFoundError);
}

TEST(ClusterPlace, OvercommitRejectedEvenWhenNormalOnlyFits) {
  auto c = default_host();
  c.place(make_instance("p", without_disk(kLarge), InstanceKind::Preemptible, "h", 0, 1000));
  c.place(make_instance("q", without_disk(kLarge), InstanceKind::Preemptible, "h", 0, 1000));
  EXPECT_THROW(c.place(make_instance("n", kSmall, InstanceKind::Normal, "h", 0, 1000)), ConsistencyError);
  EXPECT_FALSE(c.has_instance("n"));
}

TEST(ClusterRemove, OnlyInstanceRestoresEmptyViews) {
  auto c = default_host();
  c.place(make_instance("a", kLarge, InstanceKind::Normal, "h", 0, 1000));
  c.remove("a");
  EXPECT_EQ(c.view("h", ViewMode::Full).free, kDefaultHostCapacity);
  EXPECT_EQ(c.view("h", ViewMode::NormalOnly).free, kDefaultHostCapacity);
}

TEST(ClusterRemove, PreemptibleLeavesNormalOnlyViewUnchanged) {
  auto c = default_host();
  c.place(make_instance("n", kMedium, InstanceKind::Normal, "h", 0, 1000));
  c.place(make_instance("p", kMedium, InstanceKind::Preemptible, "h", 0, 1000));
  const auto before = c.view("h", ViewMode::NormalOnly).free;
  c.remove("p");
  EXPECT_EQ(c.view("h", ViewMode::NormalOnly).free, before);
}

TEST(ClusterRemove, NormalRaisesBothViewsEqually) {
  auto c = default_host();
  c.place(make_instance("n", kMedium, InstanceKind::Normal, "h", 0, 1000));
  c.place(make_instance("p", kSmall, InstanceKind::Preemptible, "h", 0, 1000));
  const auto full = c.view("h", ViewMode::Full).free;
  const auto normal = c.view("h", ViewMode::NormalOnly).free;
  c.remove("n");
  EXPECT_EQ(c.view("h", ViewMode::Full).free - full, kMedium.resources);
  EXPECT_EQ(c.view("h", ViewMode::NormalOnly).free - normal, kMedium.resources);
}

TEST(ClusterRemove, UnknownIdIsNotFound) {
  auto c = default_host();
  EXPECT_THROW(c.remove("ghost"), NotFoundError);
}

// Random place/remove sequences keep the dual-view gap, conservation and
// place/remove identity.
TEST(ClusterProperties, RandomSequencesPreserveInvariants) {
  std::mt19937_64 rng(7);
  const Flavor flavors[] = {kSmall, kMedium, kLarge};
  auto c = make_uniform_cluster(5);
  std::vector<std::string> live;
  for (int step = 0; step < 3000; ++step) {
    if (!live.empty() && rng() % 3 == 0) {
      const auto idx = rng() % live.size();
      c.remove(live[idx]);
      live.erase(live.begin() + static_cast<long>(idx));
    } else {
      const auto host = c.host_ids()[rng() % c.host_count()];
      const auto& flavor = flavors[rng() % 3];
      const auto kind = rng() % 2 ? InstanceKind::Normal : InstanceKind::Preemptible;
      auto inst = make_instance("i" + std::to_string(step), flavor, kind, host, 0, 0);
      if (!fits_within(flavor.resources, c.view(host, ViewMode::Full).free)) continue;
      const auto before_full = c.view(host, ViewMode::Full).free;
      const auto before_normal = c.view(host, ViewMode::NormalOnly).free;
      c.place(inst);
      if (rng() % 5 == 0) {
        c.remove(inst.id);
        ASSERT_EQ(c.view(host, ViewMode::Full).free, before_full);
        ASSERT_EQ(c.view(host, ViewMode::NormalOnly).free, before_normal);
      } else {
        live.push_back(inst.id);
      }
    }
    ResourceVector used_total;
    for (const auto& id : c.host_ids()) {
      const auto full = c.view(id, ViewMode::Full);
      const auto normal = c.view(id, ViewMode::NormalOnly);
      ResourceVector preempt;
      for (const auto& p : full.resident_preemptibles) preempt += p.resources();
      ASSERT_EQ(normal.free - full.free, preempt);
      ASSERT_TRUE(fits_within(full.free, normal.free));
      ASSERT_TRUE(is_non_negative(full.free));
      used_total += c.host(id).capacity - full.free;
    }
    ResourceVector registered;
    for (const auto& inst : c.instances()) registered += inst.resources();
    ASSERT_EQ(used_total, registered);
  }
}

TEST(FlavorCatalog, DefaultsAndValidation) {
  const auto cat = default_flavor_catalog();
  EXPECT_EQ(cat.at("large").resources, (ResourceVector{4, 8000, 80}));
  EXPECT_THROW(cat.at("xl"), NotFoundError);
  FlavorCatalog c;
  EXPECT_THROW(c.add({"bad", {0, 100, 0}}), ContractViolation);
  EXPECT_THROW(c.add({"bad", {1, 0, 0}}), ContractViolation);
  c.add({"ok", {1, 1, 0}});
  EXPECT_THROW(c.add({"ok", {1, 1, 0}}), ContractViolation);
}

}  // namespace
}  // namespace preemptsched
