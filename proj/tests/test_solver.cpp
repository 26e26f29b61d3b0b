#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "edgecache/solver.hpp"

using namespace edgecache;

namespace {

PlacementProblem threeItems() {
  PlacementProblem p;
  p.capacity = 8;
  p.cloudBudget = 100;
  p.items = {{6.0, 5, {}, 0}, {5.0, 4, {}, 0}, {4.0, 4, {}, 0}};
  return p;
}

PlacementProblem randomProblem(std::mt19937_64& gen, std::size_t n, std::size_t neighbors) {
  PlacementProblem p;
  Bytes total = 0;
  std::vector<Bytes> neighborTotal(neighbors, 0);
  Bytes cloudTotal = 0;
  for (std::size_t j = 0; j < n; ++j) {
    PlacementItem it;
    it.size = 1 + gen() % 1000;
    // a quarter of the items carry zero utility, as in non-urgent periods
    it.utility = gen() % 4 == 0 ? 0.0 : static_cast<double>(gen() % 10000) / 997.0;
    const std::size_t holder = gen() % (neighbors + 1);
    it.neighborCost.assign(neighbors, 0);
    if (holder < neighbors) it.neighborCost[holder] = it.size;
    else it.cloudCost = it.size;
    total += it.size;
    if (holder < neighbors) neighborTotal[holder] += it.size;
    cloudTotal += it.cloudCost;
    p.items.push_back(std::move(it));
  }
  p.capacity = total * (20 + gen() % 60) / 100;
  for (auto t : neighborTotal) p.neighborBudgets.push_back(t * (gen() % 100) / 100);
  p.cloudBudget = cloudTotal * (gen() % 100) / 100;
  return p;
}

}  // namespace

TEST(LinearProgram, TwoVariableVertex) {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, 0 <= x, y <= 3
  lp::Problem p{2, 2, {1, 1, 1, 3}, {4, 6}, {3, 2}, {3, 3}};
  const auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::Optimal);
  EXPECT_NEAR(r.x[0], 3.0, 1e-9);
  EXPECT_NEAR(r.x[1], 1.0, 1e-9);
  EXPECT_NEAR(r.objective, 11.0, 1e-9);
}

TEST(Relaxation, FractionalKnapsack) {
  const auto p = threeItems();
  const std::vector<std::int8_t> free(3, -1);
  const auto r = solveRelaxation(p, free);
  ASSERT_TRUE(r.feasible);
  // best ratio 5/4 first, then 6/5 fills the remaining 4 of 5 bytes
  EXPECT_NEAR(r.bound, 9.8, 1e-9);
  EXPECT_NEAR(r.x[0], 0.8, 1e-9);
  EXPECT_NEAR(r.x[1], 1.0, 1e-9);
  EXPECT_NEAR(r.x[2], 0.0, 1e-9);
}

TEST(Relaxation, FixingAnItemOut) {
  const auto p = threeItems();
  const std::vector<std::int8_t> fixed{-1, 0, -1};
  EXPECT_NEAR(solveRelaxation(p, fixed).bound, 9.0, 1e-9);
}

TEST(Relaxation, OverfullAssignmentIsInfeasible) {
  const auto p = threeItems();
  const std::vector<std::int8_t> fixed{1, 1, -1};
  EXPECT_FALSE(solveRelaxation(p, fixed).feasible);
}

TEST(Relaxation, SingleItemThatFits) {
  PlacementProblem p;
  p.capacity = 10;
  p.items = {{5.0, 4, {}, 0}};
  const std::vector<std::int8_t> free(1, -1);
  const auto r = solveRelaxation(p, free);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.bound, 5.0, 1e-12);
}

TEST(Relaxation, SingleOversizedItemIsFractional) {
  PlacementProblem p;
  p.capacity = 3;
  p.items = {{5.0, 4, {}, 0}};
  const std::vector<std::int8_t> free(1, -1);
  const auto r = solveRelaxation(p, free);
  EXPECT_NEAR(r.x[0], 0.75, 1e-12);
  EXPECT_NEAR(r.bound, 3.75, 1e-12);
}

TEST(BranchAndBound, PicksTheTwoSmallerItems) {
  PlacementProblem p;
  p.capacity = 7;
  p.cloudBudget = 100;
  p.items = {{6.0, 5, {}, 0}, {5.0, 4, {}, 0}, {4.0, 3, {}, 0}};
  const auto sol = branchAndBound(p);
  EXPECT_EQ(sol.selected, (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_DOUBLE_EQ(sol.objective, 9.0);
  EXPECT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_EQ(bruteForceOracle(p).selected, sol.selected);
}

TEST(BranchAndBound, FractionalRootStillFindsOptimum) {
  const auto sol = branchAndBound(threeItems());
  EXPECT_EQ(sol.selected, (std::vector<std::uint8_t>{0, 1, 1}));
  EXPECT_DOUBLE_EQ(sol.objective, 9.0);
}

TEST(BranchAndBound, EverythingFits) {
  auto p = threeItems();
  p.capacity = 1000;
  const auto sol = branchAndBound(p);
  EXPECT_EQ(sol.selected, (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_DOUBLE_EQ(sol.objective, 15.0);
}

TEST(BranchAndBound, EmptyProblem) {
  const PlacementProblem p;
  const auto sol = branchAndBound(p);
  EXPECT_TRUE(sol.selected.empty());
  EXPECT_EQ(sol.objective, 0.0);
}

TEST(BranchAndBound, NeighborLinkBindsSelection) {
  PlacementProblem p;
  p.capacity = 100;
  p.neighborBudgets = {10};
  p.cloudBudget = 0;
  p.items = {{3.0, 10, {10}, 0}, {2.0, 6, {6}, 0}, {2.0, 4, {4}, 0}, {9.0, 5, {0}, 5}};
  // the cloud budget is empty, so the cloud-only item is out; 2 + 2 beats 3
  const auto sol = branchAndBound(p);
  EXPECT_EQ(sol.selected, (std::vector<std::uint8_t>{0, 1, 1, 0}));
  EXPECT_DOUBLE_EQ(sol.objective, 4.0);
}

TEST(BranchAndBound, MatchesExhaustiveSearch) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = randomProblem(gen, 1 + gen() % 15, gen() % 4);
    const auto want = bruteForceOracle(p);
    const auto got = branchAndBound(p);
    ASSERT_EQ(got.status, SolveStatus::Optimal);
    ASSERT_TRUE(p.feasible(got.selected)) << "trial " << trial;
    ASSERT_NEAR(got.objective, want.objective, 1e-9 * std::max(1.0, want.objective)) << "trial " << trial;
  }
}

TEST(BranchAndBound, BoundsNeverUnderestimate) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = randomProblem(gen, 12, 2);
    std::vector<SearchNode> trace;
    const auto sol = branchAndBound(p, {.trace = &trace});
    const double opt = bruteForceOracle(p).objective;
    ASSERT_FALSE(trace.empty());
    ASSERT_GE(trace.front().bound, opt - 1e-9);
    for (const auto& node : trace) {
      const auto& parent = trace.at(node.parent);
      ASSERT_LE(node.bound, parent.bound + 1e-9);
      if (node.integral) {
        ASSERT_LE(*node.integral, opt + 1e-9);
      }
    }
    ASSERT_NEAR(sol.objective, opt, 1e-9 * std::max(1.0, opt));
  }
}

TEST(BranchAndBound, NodeLimitKeepsAFeasibleIncumbent) {
  std::mt19937_64 gen(5);
  const auto p = randomProblem(gen, 60, 2);
  const auto sol = branchAndBound(p, {.nodeLimit = 3});
  EXPECT_TRUE(p.feasible(sol.selected));
  EXPECT_LE(sol.nodes, 3u);
}

TEST(Oracle, RefusesLargeProblems) {
  std::mt19937_64 gen(1);
  EXPECT_THROW(bruteForceOracle(randomProblem(gen, kOracleMaxItems + 1, 0)), Error);
}

TEST(Oracle, SingleOversizedItem) {
  PlacementProblem p;
  p.capacity = 1;
  p.items = {{5.0, 2, {}, 0}};
  const auto sol = bruteForceOracle(p);
  EXPECT_EQ(sol.selected, (std::vector<std::uint8_t>{0}));
  EXPECT_EQ(sol.objective, 0.0);
  EXPECT_EQ(branchAndBound(p).objective, 0.0);
}

TEST(Oracle, EmptyProblem) { EXPECT_EQ(bruteForceOracle(PlacementProblem{}).objective, 0.0); }

TEST(Oracle, NothingFeasible) {
  PlacementProblem p;
  p.capacity = 1;
  p.items = {{5.0, 2, {}, 0}, {1.0, 3, {}, 0}};
  const auto sol = bruteForceOracle(p);
  EXPECT_EQ(sol.selected, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_EQ(sol.objective, 0.0);
}

TEST(ProblemFile, RoundTrip) {
  std::mt19937_64 gen(9);
  const auto p = randomProblem(gen, 10, 3);
  std::stringstream ss;
  writeProblem(ss, p);
  const auto q = readProblem(ss);
  ASSERT_EQ(q.items.size(), p.items.size());
  EXPECT_EQ(q.capacity, p.capacity);
  EXPECT_EQ(q.neighborBudgets, p.neighborBudgets);
  EXPECT_EQ(q.cloudBudget, p.cloudBudget);
  for (std::size_t j = 0; j < p.items.size(); ++j) {
    EXPECT_EQ(q.items[j].utility, p.items[j].utility);
    EXPECT_EQ(q.items[j].neighborCost, p.items[j].neighborCost);
    EXPECT_EQ(q.items[j].cloudCost, p.items[j].cloudCost);
  }
}

TEST(ProblemFile, ArityMismatchIsReported) {
  std::istringstream in("budgets 10 5 7\n1.0 3 2\n");
  EXPECT_THROW(readProblem(in), Error);
}
