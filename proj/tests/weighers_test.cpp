#include <gtest/gtest.h>

#include <random>

#include "preemptsched/scheduler.hpp"
#include "preemptsched/weighers.hpp"
#include "support/snapshot_tables.hpp"

namespace preemptsched {
namespace {

using testing::make_instance;

CapacityView view_with_free(ResourceVector free) {
  CapacityView v;
  v.host = "h";
  v.free = free;
  return v;
}

Request medium_request() { return {"r", kMedium, InstanceKind::Normal, 0}; }

TEST(Normalize, AffineRescale) {
  const std::vector<double> raw{2, 4, 6};
  EXPECT_EQ(normalize(raw), (std::vector<double>{0.0, 0.5, 1.0}));
  const std::vector<double> two{-30, 0};
  EXPECT_EQ(normalize(two), (std::vector<double>{0.0, 1.0}));
}

TEST(Normalize, DegenerateColumnIsAllZero) {
  EXPECT_EQ(normalize(std::vector<double>{5}), (std::vector<double>{0.0}));
  EXPECT_EQ(normalize(std::vector<double>{-1, -1, -1}), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Normalize, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(normalize(std::vector<double>{}), ContractViolation);
  EXPECT_THROW(normalize(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), ContractViolation);
}

TEST(Normalize, OrderPreservingAndAffineInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> value(-100, 100);
  std::uniform_real_distribution<double> scale(0.1, 10);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> raw(1 + rng() % 10);
    for (auto& w : raw) w = std::round(value(rng));
    const auto norm = normalize(raw);
    const double a = scale(rng), b = value(rng);
    std::vector<double> moved;
    for (double w : raw) moved.push_back(a * w + b);
    const auto norm_moved = normalize(moved);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      ASSERT_GE(norm[i], 0.0);
      ASSERT_LE(norm[i], 1.0);
      for (std::size_t j = 0; j < raw.size(); ++j) {
        if (raw[i] <= raw[j]) {
          ASSERT_LE(norm[i], norm[j]);
        }
        if (raw[i] < raw[j]) {
          ASSERT_LT(norm_moved[i], norm_moved[j]);
        }
      }
    }
    const auto argmax = std::max_element(norm.begin(), norm.end()) - norm.begin();
    const auto argmax_moved = std::max_element(norm_moved.begin(), norm_moved.end()) - norm_moved.begin();
    ASSERT_EQ(argmax, argmax_moved);
  }
}

TEST(TotalWeight, HandComputedSums) {
  EXPECT_EQ(total_weight(std::vector<double>{1.0}, std::vector<double>{1.0}), 1.0);
  EXPECT_EQ(total_weight(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 1.0}), 2.0);
  EXPECT_NEAR(total_weight(std::vector<double>{0.5, 1.0}, std::vector<double>{2.0, 1.0}), 2.0, 1e-12);
  EXPECT_THROW(total_weight(std::vector<double>{1.0}, std::vector<double>{}), ContractViolation);
}

TEST(WeighHosts, NormalizesPerWeigherAcrossCandidates) {
  // Two weighers over three hosts: raw columns (0, 5, 10) and (3, 3, 3).
  std::vector<CapacityView> views(3, view_with_free({}));
  for (int i = 0; i < 3; ++i) views[i].free.vcpus = i * 5;
  const std::vector<Weigher> ws{
      {"linear", 2.0, [](const Request&, const CapacityView& v, Minutes) { return double(v.free.vcpus); }},
      {"flat", 4.0, [](const Request&, const CapacityView&, Minutes) { return 3.0; }}};
  const auto omega = weigh_hosts(medium_request(), views, ws, 0);
  EXPECT_NEAR(omega[0], 0.0, 1e-12);
  EXPECT_NEAR(omega[1], 1.0, 1e-12);
  EXPECT_NEAR(omega[2], 2.0, 1e-12);
}

TEST(OvercommitRank, DetectsAnyShortDimension) {
  EXPECT_EQ(overcommit_rank(medium_request(), view_with_free({0, 0, 0})), -1.0);
  EXPECT_EQ(overcommit_rank(medium_request(), view_with_free({2, 4000, 40})), 0.0);
  EXPECT_EQ(overcommit_rank(medium_request(), view_with_free({4, 2000, 40})), -1.0);
  EXPECT_EQ(overcommit_rank(medium_request(), view_with_free({2, 4000, 39})), -1.0);
}

TEST(OvercommitRank, AgreesWithFitFilter) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto v = view_with_free({static_cast<std::int64_t>(rng() % 6) - 1,
                                   static_cast<std::int64_t>(rng() % 6000) - 500,
                                   static_cast<std::int64_t>(rng() % 80) - 10});
    ASSERT_EQ(overcommit_rank(medium_request(), v) == 0.0, resource_fit_filter(medium_request(), v));
  }
}

TEST(PeriodRank, SumsPartialHoursOfPreemptiblesOnly) {
  const auto table = testing::snapshot_tables()[0];
  const auto c = testing::build_cluster(table);
  // host-B: preemptibles at 71 and 91 minutes -> 11 + 31.
  EXPECT_EQ(period_rank(medium_request(), c.view("host-B", ViewMode::Full), c.clock()), -(71 % 60 + 91 % 60));
  EXPECT_EQ(period_rank(medium_request(), c.view("host-B", ViewMode::Full), c.clock()), -42.0);
}

TEST(PeriodRank, NoPreemptiblesOrHourBoundariesScoreZero) {
  Cluster c({{"h", kDefaultHostCapacity}}, 600);
  c.place(make_instance("n", kMedium, InstanceKind::Normal, "h", 37, 600));
  EXPECT_EQ(period_rank(medium_request(), c.view("h", ViewMode::Full), 600), 0.0);
  c.place(make_instance("p", kMedium, InstanceKind::Preemptible, "h", 120, 600));
  EXPECT_EQ(period_rank(medium_request(), c.view("h", ViewMode::Full), 600), 0.0);
  c.place(make_instance("q", kSmall, InstanceKind::Preemptible, "h", 61, 600));
  EXPECT_EQ(period_rank(medium_request(), c.view("h", ViewMode::Full), 600), -1.0);
}

TEST(PeriodRank, NeverPositive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Cluster c({{"h", {64, 128000, 1000}}}, 1000);
    bool all_on_boundary = true;
    const int count = static_cast<int>(rng() % 8);
    for (int i = 0; i < count; ++i) {
      const Minutes run = static_cast<Minutes>(rng() % 400);
      if (run % 60 != 0) all_on_boundary = false;
      c.place(make_instance("p" + std::to_string(i), kSmall, InstanceKind::Preemptible, "h", run, 1000));
    }
    const double w = period_rank(medium_request(), c.view("h", ViewMode::Full), 1000);
    ASSERT_LE(w, 0.0);
    ASSERT_EQ(w == 0.0, all_on_boundary);
  }
}

TEST(VictimCostRank, ScoresCheapestEvictionOnHost) {
  const auto tables = testing::snapshot_tables();
  const auto c = testing::build_cluster(tables[2]);
  const auto req = testing::table_request(tables[2]);
  const auto cost = partial_hour_cost_fn();
  // Large request: AP2+AP3+AP4 = 38+10+7 on A, BP1 = 58 on B, CP1 = 57 on C.
  EXPECT_EQ(victim_cost_rank(req, c.view("host-A", ViewMode::Full), cost, c.clock()), -55.0);
  EXPECT_EQ(victim_cost_rank(req, c.view("host-B", ViewMode::Full), cost, c.clock()), -58.0);
  EXPECT_EQ(victim_cost_rank(req, c.view("host-C", ViewMode::Full), cost, c.clock()), -57.0);
  // host-D holds only normals and cannot make room: nothing to evict.
  EXPECT_EQ(victim_cost_rank(req, c.view("host-D", ViewMode::Full), cost, c.clock()), 0.0);
}

TEST(WeigherRegistry, ResolvesNamesAndMultipliers) {
  const auto cost = partial_hour_cost_fn();
  EXPECT_EQ(weigher_by_name("overcommit", 2.5, cost).multiplier, 2.5);
  EXPECT_EQ(weigher_by_name("period", 1.0, cost).name, "period");
  EXPECT_EQ(weigher_by_name("victim_cost", 1.0, cost).name, "victim_cost");
  EXPECT_THROW(weigher_by_name("ram", 1.0, cost), NotFoundError);
}

}  // namespace
}  // namespace preemptsched
