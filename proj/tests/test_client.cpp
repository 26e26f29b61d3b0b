#include <gtest/gtest.h>

#include <cmath>

#include "edgecache/client.hpp"

using namespace edgecache;

namespace {
void expectRel(double got, double want) { EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, std::abs(want))); }
}  // namespace

TEST(MatchIndicator, CapacityAboveRate) { EXPECT_EQ(matchIndicator(2e6, 1e6), 1); }
TEST(MatchIndicator, CapacityBelowRate) { EXPECT_EQ(matchIndicator(1e6, 2e6), 0); }
TEST(MatchIndicator, EqualIsInclusive) { EXPECT_EQ(matchIndicator(1e6, 1e6), 1); }

TEST(MatchIndicator, NeverDropsAsCapacityGrows) {
  for (double rate : {3e5, 1e6, 4.5e6})
    for (double cap = 0; cap < 1e7; cap += 1e5) ASSERT_LE(matchIndicator(cap, rate), matchIndicator(cap + 1e5, rate));
}

TEST(CachePriority, EmptyBufferOmegaTwo) {
  // 1 MB over 1 Mbit/s takes 8 s, far above the empty buffer.
  expectRel(cachePriority(0.0, 1'000'000, 1e6, 2.0), std::exp(2.0) - 1.0);
  expectRel(cachePriority(0.0, 1'000'000, 1e6, 2.0), 6.38905609893065);
}

TEST(CachePriority, BufferCoversTransmission) {
  // 250 kB at 1 Mbit/s is 2 s; 10 s of buffer is plenty.
  EXPECT_EQ(cachePriority(10.0, 250'000, 1e6, 2.0), 0.0);
}

TEST(CachePriority, OneSecondBuffer) {
  expectRel(cachePriority(1.0, 250'000, 1e6, 2.0), std::exp(1.0) - 1.0);
  expectRel(cachePriority(1.0, 250'000, 1e6, 2.0), 1.71828182845905);
}

TEST(CachePriority, BoundaryIsNonUrgent) {
  // Transmission time exactly equals the buffer.
  EXPECT_EQ(cachePriority(2.0, 250'000, 1e6, 2.0), 0.0);
}

TEST(CachePriority, ZeroCapacityIsUrgent) { EXPECT_GT(cachePriority(50.0, 1, 0.0, 2.0), 0.0); }

TEST(CapacityEstimate, FirstSampleInitializes) {
  CapacityEstimator e{.weight = 1.0};
  e.observe(4e6);
  EXPECT_EQ(e.estimate, 4e6);
  CapacityEstimator f{.weight = 0.3};
  f.observe(4e6);
  EXPECT_EQ(f.estimate, 4e6);
}

TEST(CapacityEstimate, EqualObservationsAreAFixedPoint) {
  CapacityEstimator e{.weight = 0.3};
  e.observe(5e6);
  e.observe(5e6);
  expectRel(e.estimate, 5e6);
}

TEST(CapacityEstimate, ConvexCombination) {
  CapacityEstimator e{.weight = 0.5};
  e.observe(2e6);
  e.observe(4e6);
  expectRel(e.estimate, 3e6);
}

TEST(Playback, DrainsHalfOfSixtyFrames) {
  ClientState c;
  c.frameRate = 30;
  c.bufferFrames = 60;
  EXPECT_EQ(advancePlayback(c, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(c.bufferFrames, 30.0);
}

TEST(Playback, EmptyBufferStallsWholeStep) {
  ClientState c;
  c.frameRate = 30;
  EXPECT_DOUBLE_EQ(advancePlayback(c, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(c.totalStallSeconds, 1.0);
}

TEST(Playback, PartialDrain) {
  ClientState c;
  c.frameRate = 30;
  c.bufferFrames = 15;
  EXPECT_DOUBLE_EQ(advancePlayback(c, 1.0), 0.5);
  EXPECT_EQ(c.bufferFrames, 0.0);
  EXPECT_DOUBLE_EQ(c.totalPlayedSeconds, 0.5);
}

TEST(Delivery, AddsFramesAndObservesThroughput) {
  ClientState c;
  c.frameRate = 30;
  recordDelivery(c, 500'000, 2.0, 60);
  EXPECT_DOUBLE_EQ(c.bufferSeconds(), 2.0);
  EXPECT_DOUBLE_EQ(c.capacityBps(), 2e6);
}

TEST(QueuePriorities, HandTrace) {
  // 1 s buffered, 4 Mbit/s estimate, 2 s segments, 6 s buffer cap: the next
  // request goes out once the buffer is at or below 4 s.
  ClientState c;
  c.frameRate = 30;
  c.bufferFrames = 30;
  c.capacity.observe(4e6);
  const std::vector<Bytes> sizes{1'000'000, 1'000'000, 500'000};  // 2 s, 2 s, 1 s at 4 Mbit/s
  const auto pr = queuePriorities(c, sizes, 2.0, 6.0, 2.0);
  ASSERT_EQ(pr.size(), 3u);
  // position 0: BT 1 < 2 -> e^(2/2) - 1
  expectRel(pr[0], std::exp(1.0) - 1.0);
  // position 1: BT = max(1-2,0)+2 = 2, transmit 2 -> not urgent
  EXPECT_EQ(pr[1], 0.0);
  // position 2: BT = max(2-2,0)+2 = 2, transmit 1 -> not urgent
  EXPECT_EQ(pr[2], 0.0);
}

TEST(QueuePriorities, SlowClientStaysUrgentUpToIssueLevel) {
  ClientState c;
  c.frameRate = 30;
  c.capacity.observe(1e6);  // 1 MB takes 8 s
  const std::vector<Bytes> sizes(4, 1'000'000);
  const auto pr = queuePriorities(c, sizes, 2.0, 6.0, 2.0);
  expectRel(pr[0], std::exp(2.0) - 1.0);
  // buffer never grows: max(0 - 8, 0) + 2 = 2 each time
  for (std::size_t j = 1; j < pr.size(); ++j) expectRel(pr[j], std::exp(2.0 / 3.0) - 1.0);
}
