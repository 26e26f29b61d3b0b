#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "edgecache/types.hpp"

namespace edgecache {

/// 1 iff the client's average capacity sustains the representation rate.
inline int matchIndicator(double capacityBps, double rateBps) { return capacityBps >= rateBps ? 1 : 0; }

/// Buffer-driven cache priority of a pending request.
///
/// A client whose remaining buffer covers the segment's transmission time is
/// non-urgent and gets 0. Otherwise the priority is exp(omega / (1 + BT)) - 1,
/// which decays as the buffer grows. Zero capacity means an unbounded
/// transmission time, so such a client is always urgent.
inline double cachePriority(double bufferSeconds, Bytes segmentBytes, double capacityBps, double omega) {
  const double transmitSeconds =
      capacityBps > 0.0 ? 8.0 * static_cast<double>(segmentBytes) / capacityBps
                        : (segmentBytes > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  if (bufferSeconds >= transmitSeconds) return 0.0;
  return std::exp(omega / (1.0 + bufferSeconds)) - 1.0;
}

/// EWMA of observed throughput. The first observation initializes directly.
struct CapacityEstimator {
  double weight = 0.3;
  double estimate = 0.0;
  bool initialized = false;

  void observe(double bps) {
    if (!initialized) {
      estimate = bps;
      initialized = true;
    } else {
      estimate = (1.0 - weight) * estimate + weight * bps;
    }
  }
};

struct ClientState {
  std::uint32_t id = 0;
  int mec = 0;
  int enb = 0;
  double frameRate = 30.0;
  double bufferFrames = 0.0;  // unplayed frames of completely received segments
  CapacityEstimator capacity;
  std::map<SegmentKey, std::uint32_t> requestCounts;  // this short period only
  double totalStallSeconds = 0.0;
  double totalPlayedSeconds = 0.0;

  double bufferSeconds() const { return bufferFrames / frameRate; }
  double capacityBps() const { return capacity.estimate; }

  std::uint32_t requestsFor(const SegmentKey& k) const {
    auto it = requestCounts.find(k);
    return it == requestCounts.end() ? 0 : it->second;
  }

  void countRequest(const SegmentKey& k) { ++requestCounts[k]; }
  void resetRequestCounts() { requestCounts.clear(); }
};

/// Folds one delivery into the capacity estimate and appends completed frames.
inline void recordDelivery(ClientState& c, Bytes bytes, double durationSeconds, double completedFrames = 0.0) {
  if (durationSeconds > 0.0) c.capacity.observe(8.0 * static_cast<double>(bytes) / durationSeconds);
  c.bufferFrames += completedFrames;
}

/// Plays `dt` seconds. Returns the stall seconds incurred (empty buffer time).
inline double advancePlayback(ClientState& c, double dt) {
  if (dt <= 0.0) return 0.0;
  const double wanted = dt * c.frameRate;
  const double consumed = std::min(c.bufferFrames, wanted);
  c.bufferFrames -= consumed;
  if (c.bufferFrames < 1e-9) c.bufferFrames = 0.0;
  const double stall = std::max(0.0, dt - consumed / c.frameRate);
  c.totalStallSeconds += stall;
  c.totalPlayedSeconds += consumed / c.frameRate;
  return stall;
}

/// Cache priorities for a client's queued requests. Position 0 uses the current
/// buffer; later positions use the buffer projected to the moment the next
/// request goes out: downloads run back to back at the estimated capacity, and
/// a request waits until the buffer has room for one more segment.
inline std::vector<double> queuePriorities(const ClientState& c, std::span<const Bytes> queuedSizes,
                                           double segmentSeconds, double maxBufferSeconds, double omega) {
  std::vector<double> out;
  out.reserve(queuedSizes.size());
  double bt = c.bufferSeconds();
  const double cap = c.capacityBps();
  const double issueLevel = std::max(0.0, maxBufferSeconds - segmentSeconds);
  for (Bytes s : queuedSizes) {
    out.push_back(cachePriority(bt, s, cap, omega));
    const double tx = cap > 0.0 ? 8.0 * static_cast<double>(s) / cap : std::numeric_limits<double>::infinity();
    bt = std::min(std::max(bt - tx, 0.0) + segmentSeconds, issueLevel);
  }
  return out;
}

}  // namespace edgecache
