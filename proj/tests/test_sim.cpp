#include <gtest/gtest.h>

#include <sstream>

#include "edgecache/proposed.hpp"
#include "edgecache/sweep.hpp"
#include "tiny_scenario.hpp"

using namespace edgecache;

namespace {

std::string periodCsv(const RunResult& r) {
  std::ostringstream os;
  writePeriodCsv(os, r);
  return os.str();
}

TrafficStats total(const RunResult& r) {
  TrafficStats t;
  for (const auto& p : r.periods)
    for (const auto& c : p.clients) t += c;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Placement step of one MEC

namespace {

CandidateItem candidate(std::uint32_t seg, double utility, Bytes size) {
  CandidateItem c;
  c.key = {1, seg, 1};
  c.size = size;
  c.utility = utility;
  c.requesters = 1;
  c.cloudCost = size;
  return c;
}

struct OneMec {
  CacheState cache{0, 10};
  AvailabilityView view{std::vector<std::set<SegmentKey>>{{}}, {{}}};
  PopularitySet pop{{0, 1}, 0.5};
  ProposedConfig cfg;
};

}  // namespace

TEST(Placement, EvictsByPriorityToFitTheSelection) {
  OneMec m;
  auto& old = m.cache.insert({1, 9, 1}, 6, Partition::Delta3);
  old.smoothedPriority = 2.0;
  TransferBudget budget({}, {}, 800.0, 1.0);  // 100 bytes of cloud budget
  const std::vector<CandidateItem> items{candidate(1, 3.0, 6), candidate(2, 1.0, 4)};
  const auto out = placeAndFetch(m.cache, items, m.view, 0, budget, m.pop, m.cfg, true);
  EXPECT_EQ(out.solution.selected, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(out.deleteBytes, 6u);
  EXPECT_EQ(out.evicted, (std::vector<SegmentKey>{SegmentKey{1, 9, 1}}));
  ASSERT_EQ(out.fetched.size(), 2u);
  EXPECT_EQ(out.fetched[0].source.kind, SourceKind::Cloud);
  EXPECT_EQ(budget.cloudUsed(), 10u);
  EXPECT_EQ(m.cache.entries().at({1, 1, 1}).partition, Partition::Delta3);  // video 1 is not popular
}

TEST(Placement, CloudBudgetLimitsTheSelection) {
  OneMec m;
  TransferBudget budget({}, {}, 40.0, 1.0);  // 5 bytes
  const std::vector<CandidateItem> items{candidate(1, 3.0, 6), candidate(2, 1.0, 4)};
  const auto out = placeAndFetch(m.cache, items, m.view, 0, budget, m.pop, m.cfg, true);
  EXPECT_EQ(out.solution.selected, (std::vector<std::uint8_t>{0, 1}));
  EXPECT_TRUE(out.evicted.empty());
  EXPECT_TRUE(m.cache.contains({1, 2, 1}));
  EXPECT_FALSE(m.cache.contains({1, 1, 1}));
}

TEST(Placement, UrgentMissIsCachedForTheNextPeriod) {
  // One client, buffer empty, one uncached segment with ample budgets.
  OneMec m;
  ClientState c;
  c.frameRate = 30;
  c.capacity.observe(1e6);
  const std::vector<ClientState> clients{c};
  const VideoCatalog cat = buildCatalog(CatalogConfig{.videos = 2, .segmentsMin = 4, .segmentsMax = 4,
                                                      .rateLadderBps = {100e3}, .sizeJitter = 0.0});
  m.cache = CacheState(0, 10'000'000);
  const SegmentKey k{1, 1, 1};
  const std::vector<ClientQueue> queues{{0, {k}}};
  const auto utilities = requestUtilities(clients, queues, m.view, 0, cat, m.cfg);
  ASSERT_EQ(utilities.size(), 1u);
  EXPECT_GT(utilities[0].utility, 0.0);
  const auto items = aggregateUtilities(std::span<const RequestUtility>(utilities), m.view, 0,
                                        [&](const SegmentKey& key) { return cat.sizeOf(key); });
  TransferBudget budget({}, {}, 1e9, 100.0);
  const auto out = placeAndFetch(m.cache, items, m.view, 0, budget, m.pop, m.cfg, true);
  ASSERT_EQ(out.fetched.size(), 1u);
  EXPECT_EQ(out.fetched[0].source.kind, SourceKind::Cloud);
  // Next period the same request finds the entry locally.
  EXPECT_TRUE(m.cache.contains(k));
  const AvailabilityView next(std::span<const CacheState>(&m.cache, 1), {{}});
  EXPECT_TRUE(aggregateUtilities(std::span<const RequestUtility>(utilities), next, 0,
                                 [&](const SegmentKey& key) { return cat.sizeOf(key); })
                  .empty());
}

TEST(Placement, SecondPeriodWithEverythingCachedIsEmpty) {
  OneMec m;
  TransferBudget budget({}, {}, 800.0, 1.0);
  const std::vector<CandidateItem> items{candidate(1, 3.0, 6), candidate(2, 1.0, 4)};
  placeAndFetch(m.cache, items, m.view, 0, budget, m.pop, m.cfg, true);
  budget.reset();
  const auto again = placeAndFetch(m.cache, items, m.view, 0, budget, m.pop, m.cfg, true);
  EXPECT_TRUE(again.candidates.empty());
  EXPECT_EQ(again.solution.objective, 0.0);
  EXPECT_TRUE(again.fetched.empty());
  EXPECT_EQ(budget.cloudUsed(), 0u);
}

TEST(Placement, ZeroUtilityOnlyFillsFreeSpace) {
  OneMec m;
  m.cache.insert({1, 9, 1}, 7, Partition::Delta3);
  TransferBudget budget({}, {}, 800.0, 1.0);
  const std::vector<CandidateItem> items{candidate(1, 0.0, 4), candidate(2, 0.0, 3)};
  const auto out = placeAndFetch(m.cache, items, m.view, 0, budget, m.pop, m.cfg, true);
  EXPECT_TRUE(out.evicted.empty());
  ASSERT_EQ(out.idleFills.size(), 1u);
  EXPECT_EQ(out.idleFills[0].key, (SegmentKey{1, 2, 1}));
}

// ---------------------------------------------------------------------------
// Whole runs

TEST(Simulation, NoCacheSendsEverythingToTheCloud) {
  const auto sc = tinyScenario();
  const auto r = runExperiment(sc, PolicyKind::None, 48'000'000, 1);
  const auto t = total(r);
  ASSERT_GT(t.requests, 0u);
  EXPECT_EQ(t.localHits, 0u);
  EXPECT_EQ(t.neighborFetches, 0u);
  EXPECT_EQ(t.cloudFetches, t.requests);
  EXPECT_EQ(t.intermecBytes, 0u);
  // Bytes are charged when a download starts; at most one per client is still in flight.
  Bytes largest = 0;
  Simulator probe(sc, PolicyKind::None, 48'000'000, 1);
  for (const auto& v : probe.catalog().videos())
    for (const auto& seg : v.segments) largest = std::max(largest, seg.back().size);
  EXPECT_GE(t.backhaulBytes, t.deliveredBytes);
  EXPECT_LE(t.backhaulBytes - t.deliveredBytes, largest * sc.topology.clients);
  EXPECT_EQ(summarize(r).hitRatio, 0.0);
}

TEST(Simulation, SameSeedSameOutput) {
  const auto sc = tinyScenario();
  for (auto p : allPolicies()) {
    const auto a = runExperiment(sc, p, 24'000'000, 2);
    const auto b = runExperiment(sc, p, 24'000'000, 2);
    EXPECT_EQ(periodCsv(a), periodCsv(b)) << toString(p);
  }
}

TEST(Simulation, DifferentSeedsDiffer) {
  const auto sc = tinyScenario();
  EXPECT_NE(periodCsv(runExperiment(sc, PolicyKind::Lru, 24'000'000, 1)),
            periodCsv(runExperiment(sc, PolicyKind::Lru, 24'000'000, 2)));
}

TEST(Simulation, AuditsPassForEveryPolicy) {
  const auto sc = tinyScenario();
  for (auto p : allPolicies())
    for (Bytes size : {12'000'000ULL, 48'000'000ULL}) {
      const auto r = runExperiment(sc, p, size, 3);
      EXPECT_TRUE(r.violations.empty()) << toString(p) << ": " << r.violations.front();
      EXPECT_GT(r.auditChecks, 0u);
      EXPECT_EQ(r.periods.size(), sc.totalShortPeriods());
    }
}

TEST(Simulation, RegionTrafficAddsUp) {
  const auto sc = tinyScenario();
  for (auto p : allPolicies()) {
    const auto r = runExperiment(sc, p, 24'000'000, 1);
    for (const auto& period : r.periods) {
      std::vector<TrafficStats> region(period.mecs.size());
      for (std::size_t k = 0; k < period.clients.size(); ++k) region[r.clientMec[k]] += period.clients[k];
      for (std::size_t q = 0; q < period.mecs.size(); ++q) {
        const auto& m = period.mecs[q];
        const auto& a = period.activity[q];
        ASSERT_EQ(m.requests, region[q].requests);
        ASSERT_EQ(m.localHits, region[q].localHits);
        ASSERT_EQ(m.deliveredBytes, region[q].deliveredBytes);
        ASSERT_EQ(m.backhaulBytes, region[q].backhaulBytes + a.fillCloudBytes) << toString(p);
        ASSERT_EQ(m.intermecBytes, region[q].intermecBytes + a.fillNeighborBytes) << toString(p);
        ASSERT_NEAR(m.stallSeconds, region[q].stallSeconds, 1e-6);
      }
      for (const auto& c : period.clients) {
        // Every request is served from exactly one place, and only cloud
        // deliveries add backhaul.
        ASSERT_EQ(c.requests, c.localHits + c.neighborFetches + c.cloudFetches);
        ASSERT_EQ(c.cloudFetches == 0, c.backhaulBytes == 0);
        ASSERT_EQ(c.neighborFetches == 0, c.intermecBytes == 0);
      }
    }
  }
}

TEST(Simulation, CacheSizesFollowDemand) {
  const auto sc = tinyScenario();
  for (auto p : {PolicyKind::Proposed, PolicyKind::Lfu}) {
    const auto r = runExperiment(sc, p, 24'000'000, 1);
    Bytes sum = 0;
    for (auto b : r.mecCapacity) sum += b;
    EXPECT_EQ(sum, 24'000'000u);
  }
  for (auto b : runExperiment(sc, PolicyKind::None, 24'000'000, 1).mecCapacity) EXPECT_EQ(b, 0u);
}

TEST(Simulation, AmpleCacheServesNearlyEverythingLocally) {
  const auto sc = tinyScenario();
  Simulator probe(sc, PolicyKind::None, 0, 1);
  const Bytes everything = probe.catalog().totalBytes() * probe.topology().mecCount();
  for (auto p : {PolicyKind::Proposed, PolicyKind::Lru}) {
    const auto r = runExperiment(sc, p, everything, 1);
    const auto& last = r.periods.back();
    std::uint64_t req = 0, hits = 0;
    for (const auto& c : last.clients) {
      req += c.requests;
      hits += c.localHits;
    }
    ASSERT_GT(req, 0u);
    EXPECT_GE(static_cast<double>(hits) / static_cast<double>(req), 0.9) << toString(p);
  }
}

TEST(Simulation, MoreCacheMeansMoreHits) {
  const auto sc = tinyScenario();
  for (auto p : {PolicyKind::Proposed, PolicyKind::Lfu}) {
    double small = 0.0, large = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      small += summarize(runExperiment(sc, p, 12'000'000, seed)).hitRatio;
      large += summarize(runExperiment(sc, p, 48'000'000, seed)).hitRatio;
    }
    EXPECT_GT(large, small) << toString(p);
  }
}
