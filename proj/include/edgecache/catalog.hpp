#pragma once

// Video library, popularity model, request workload and demand-driven
// per-MEC cache sizing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "edgecache/rng.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct CatalogConfig {
  std::uint32_t videos = 16;
  std::uint32_t segmentsMin = 20;
  std::uint32_t segmentsMax = 40;
  std::vector<double> rateLadderBps{600e3, 1.2e6, 2e6, 3e6, 4.5e6};
  double sizeJitter = 0.1;
  std::uint32_t segmentFrames = 60;
  double frameRate = 30.0;
  double zipfTheta = 0.8;
  double popularFraction = 0.2;
  std::uint64_t seed = 1;
};

struct Representation {
  std::uint32_t level = 1;
  double rateBps = 0.0;
  Bytes size = 0;
};

/// Number of protected leading segments: ceil(0.15 * N), exact in integers.
constexpr std::uint32_t prefixLength(std::uint32_t segmentCount) {
  return (15 * segmentCount + 99) / 100;
}

struct Video {
  std::uint32_t id = 0;
  std::uint32_t segmentCount = 0;
  std::uint32_t prefix = 0;  // e_f
  std::uint32_t popularityRank = 0;  // 1 = most popular
  std::vector<std::vector<Representation>> segments;  // [segment-1][level-1]

  const Representation& rep(std::uint32_t segment, std::uint32_t level) const {
    return segments.at(segment - 1).at(level - 1);
  }
};

class VideoCatalog {
 public:
  VideoCatalog() = default;
  VideoCatalog(std::vector<Video> videos, std::uint32_t levels, double segmentSeconds,
               double frameRate, std::uint32_t segmentFrames)
      : videos_(std::move(videos)),
        levels_(levels),
        segmentSeconds_(segmentSeconds),
        frameRate_(frameRate),
        segmentFrames_(segmentFrames) {}

  std::span<const Video> videos() const { return videos_; }
  const Video& video(std::uint32_t f) const { return videos_.at(f); }
  std::uint32_t size() const { return static_cast<std::uint32_t>(videos_.size()); }
  std::uint32_t levels() const { return levels_; }
  double segmentSeconds() const { return segmentSeconds_; }
  double frameRate() const { return frameRate_; }
  std::uint32_t segmentFrames() const { return segmentFrames_; }

  Bytes sizeOf(const SegmentKey& k) const { return video(k.video).rep(k.segment, k.level).size; }
  double rateOf(const SegmentKey& k) const { return video(k.video).rep(k.segment, k.level).rateBps; }

  bool valid(const SegmentKey& k) const {
    return k.video < videos_.size() && k.segment >= 1 && k.segment <= videos_[k.video].segmentCount &&
           k.level >= 1 && k.level <= levels_;
  }

  Bytes totalBytes() const {
    Bytes total = 0;
    for (const auto& v : videos_)
      for (const auto& seg : v.segments)
        for (const auto& r : seg) total += r.size;
    return total;
  }

  /// Video ids ordered by popularity rank (rank 1 first).
  std::vector<std::uint32_t> popularityOrder() const {
    std::vector<std::uint32_t> order(videos_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      return videos_[a].popularityRank < videos_[b].popularityRank;
    });
    return order;
  }

  friend bool operator==(const VideoCatalog& a, const VideoCatalog& b) {
    if (a.levels_ != b.levels_ || a.videos_.size() != b.videos_.size()) return false;
    for (std::size_t f = 0; f < a.videos_.size(); ++f) {
      const auto& x = a.videos_[f];
      const auto& y = b.videos_[f];
      if (x.segmentCount != y.segmentCount || x.prefix != y.prefix || x.popularityRank != y.popularityRank)
        return false;
      for (std::size_t i = 0; i < x.segments.size(); ++i)
        for (std::size_t l = 0; l < x.segments[i].size(); ++l)
          if (x.segments[i][l].size != y.segments[i][l].size ||
              x.segments[i][l].rateBps != y.segments[i][l].rateBps)
            return false;
    }
    return true;
  }

 private:
  std::vector<Video> videos_;
  std::uint32_t levels_ = 0;
  double segmentSeconds_ = 2.0;
  double frameRate_ = 30.0;
  std::uint32_t segmentFrames_ = 60;
};

/// Synthesizes a catalog. Each segment draws one jitter factor applied to every
/// level, so the rate ladder order is preserved per segment.
inline VideoCatalog buildCatalog(const CatalogConfig& cfg) {
  if (cfg.videos < 1) throw Error("invalid-catalog", "videos must be >= 1");
  if (cfg.rateLadderBps.empty()) throw Error("invalid-catalog", "levels must be >= 1");
  if (cfg.segmentsMin < 1 || cfg.segmentsMax < cfg.segmentsMin)
    throw Error("invalid-catalog", "segment count range is empty");
  for (std::size_t l = 0; l < cfg.rateLadderBps.size(); ++l) {
    if (!(cfg.rateLadderBps[l] > 0.0)) throw Error("invalid-catalog", "rates must be positive");
    if (l > 0 && !(cfg.rateLadderBps[l] > cfg.rateLadderBps[l - 1]))
      throw Error("invalid-catalog", "rate ladder must be strictly increasing");
  }
  if (cfg.sizeJitter < 0.0 || cfg.sizeJitter >= 1.0)
    throw Error("invalid-catalog", "size jitter must be in [0, 1)");
  if (cfg.frameRate <= 0.0 || cfg.segmentFrames == 0)
    throw Error("invalid-catalog", "frame rate and frames per segment must be positive");

  const double segSeconds = cfg.segmentFrames / cfg.frameRate;
  const auto levels = static_cast<std::uint32_t>(cfg.rateLadderBps.size());
  Rng rng(deriveSeed(cfg.seed, {stream::kCatalog}));

  std::vector<Video> videos(cfg.videos);
  for (std::uint32_t f = 0; f < cfg.videos; ++f) {
    Video& v = videos[f];
    v.id = f;
    v.segmentCount = static_cast<std::uint32_t>(uniformInt(rng, cfg.segmentsMin, cfg.segmentsMax));
    v.prefix = prefixLength(v.segmentCount);
    v.segments.resize(v.segmentCount);
    for (auto& seg : v.segments) {
      const double jitter = uniform(rng, -cfg.sizeJitter, cfg.sizeJitter);
      seg.resize(levels);
      for (std::uint32_t l = 0; l < levels; ++l) {
        Representation& r = seg[l];
        r.level = l + 1;
        r.rateBps = cfg.rateLadderBps[l] * (1.0 + jitter);
        r.size = static_cast<Bytes>(std::llround(r.rateBps * segSeconds / 8.0));
        if (r.size == 0) r.size = 1;
        if (l > 0 && r.size <= seg[l - 1].size) r.size = seg[l - 1].size + 1;
      }
    }
  }

  // Popularity ranks: a seeded permutation so rank is independent of id.
  Rng prng(deriveSeed(cfg.seed, {stream::kPopularity}));
  std::vector<std::uint32_t> perm(cfg.videos);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniformInt(prng, 0, i - 1)]);
  for (std::uint32_t r = 0; r < cfg.videos; ++r) videos[perm[r]].popularityRank = r + 1;

  return VideoCatalog(std::move(videos), levels, segSeconds, cfg.frameRate, cfg.segmentFrames);
}

/// Popularity order plus the popular prefix of it used for the protected partition.
class PopularitySet {
 public:
  PopularitySet() = default;
  PopularitySet(std::vector<std::uint32_t> order, double popularFraction) : order_(std::move(order)) {
    if (order_.empty()) return;
    auto n = static_cast<std::size_t>(std::ceil(popularFraction * order_.size() - 1e-9));
    popularCount_ = std::clamp<std::size_t>(n, 1, order_.size());
    rankOf_.assign(order_.size(), 0);
    for (std::size_t r = 0; r < order_.size(); ++r) rankOf_.at(order_[r]) = static_cast<std::uint32_t>(r + 1);
  }

  static PopularitySet fromCatalog(const VideoCatalog& c, double popularFraction) {
    return PopularitySet(c.popularityOrder(), popularFraction);
  }

  std::span<const std::uint32_t> order() const { return order_; }
  std::span<const std::uint32_t> popular() const { return std::span(order_).first(popularCount_); }
  std::size_t popularCount() const { return popularCount_; }
  bool isPopular(std::uint32_t f) const { return f < rankOf_.size() && rankOf_[f] <= popularCount_; }
  std::uint32_t rankOf(std::uint32_t f) const { return rankOf_.at(f); }

  /// Deterministic reshuffle of the order (optional per-long-period popularity drift).
  PopularitySet redrawn(std::uint64_t seed, std::uint64_t longPeriod, double popularFraction) const {
    std::vector<std::uint32_t> o = order_;
    Rng rng(deriveSeed(seed, {stream::kPopularity, longPeriod}));
    for (std::size_t i = o.size(); i > 1; --i) std::swap(o[i - 1], o[uniformInt(rng, 0, i - 1)]);
    return PopularitySet(std::move(o), popularFraction);
  }

 private:
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> rankOf_;
  std::size_t popularCount_ = 0;
};

/// Zipf(theta) over popularity ranks 1..n.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double theta) : cumulative_(n) {
    if (n == 0) throw Error("invalid-workload", "zipf over empty set");
    if (!(theta > 0.0)) throw Error("invalid-workload", "zipf exponent must be > 0");
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -theta);
      cumulative_[r] = acc;
    }
    for (auto& c : cumulative_) c /= acc;
  }

  /// 0-based rank index.
  std::size_t sample(Rng& rng) const {
    const double u = uniform01(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

  double probability(std::size_t rank) const {
    return rank == 0 ? cumulative_[0] : cumulative_[rank] - cumulative_[rank - 1];
  }

 private:
  std::vector<double> cumulative_;
};

// ---------------------------------------------------------------------------
// Workload

struct WorkloadConfig {
  double abandonProbability = 0.5;  // chance a session stops inside the prefix
  std::uint32_t lookaheadSegments = 50;
  std::uint32_t historySessions = 20;
};

struct Session {
  std::uint32_t video = 0;
  std::uint32_t lastSegment = 0;  // segments 1..lastSegment will be watched
};

/// Per-client session stream. Draws depend only on (seed, client, session index),
/// never on simulated timing, so every policy sees the same viewing choices.
class SessionSource {
 public:
  SessionSource(std::uint64_t seed, std::uint64_t streamTag, std::uint32_t client)
      : rng_(deriveSeed(seed, {streamTag, client})) {}

  Session next(const VideoCatalog& catalog, const PopularitySet& pop, const ZipfSampler& zipf,
               double abandonProbability) {
    Session s;
    s.video = pop.order()[zipf.sample(rng_)];
    const Video& v = catalog.video(s.video);
    if (uniform01(rng_) < abandonProbability)
      s.lastSegment = static_cast<std::uint32_t>(uniformInt(rng_, 1, v.prefix));
    else
      s.lastSegment = v.segmentCount;
    return s;
  }

 private:
  Rng rng_;
};

/// Playback position of a client as seen by the request generator.
struct PlaybackCursor {
  std::uint32_t client = 0;
  std::uint32_t video = 0;
  std::uint32_t nextSegment = 1;  // next segment not yet requested
  std::uint32_t targetLevel = 1;
  bool active = false;
};

struct SegmentRequest {
  std::uint32_t client = 0;
  SegmentKey key;
  std::uint32_t position = 0;  // 0 = head of the client's queue
};

/// Each active client's next in-order requests at its target level, up to
/// `lookahead` segments, stopping at the end of the video.
inline std::vector<std::vector<SegmentRequest>> drawRequests(const VideoCatalog& catalog,
                                                             std::span<const PlaybackCursor> clients,
                                                             std::uint32_t lookahead) {
  std::vector<std::vector<SegmentRequest>> out(clients.size());
  for (std::size_t c = 0; c < clients.size(); ++c) {
    const auto& cur = clients[c];
    if (!cur.active) continue;
    const Video& v = catalog.video(cur.video);
    for (std::uint32_t j = 0; j < lookahead; ++j) {
      const std::uint32_t seg = cur.nextSegment + j;
      if (seg > v.segmentCount) break;
      out[c].push_back({cur.client, SegmentKey{cur.video, seg, cur.targetLevel}, j});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Historical demand and cache sizing

/// Request counts per client over a training window. SR_{k,f} is the set of
/// segments of f with a nonzero count for k.
struct DemandHistory {
  std::vector<std::map<SegmentKey, std::uint64_t>> counts;  // [client]

  explicit DemandHistory(std::size_t clients = 0) : counts(clients) {}

  void add(std::uint32_t client, const SegmentKey& k, std::uint64_t n = 1) { counts.at(client)[k] += n; }

  /// Aggregate counts over a subset of clients.
  std::map<SegmentKey, std::uint64_t> aggregate(std::span<const std::uint32_t> clients) const {
    std::map<SegmentKey, std::uint64_t> out;
    for (auto c : clients)
      for (const auto& [k, n] : counts.at(c)) out[k] += n;
    return out;
  }
};

/// Splits `total` proportionally to `weights`. Floors each share, then hands
/// the remaining bytes out by descending fractional part (ties: heavier region,
/// then lower index). Exact integer arithmetic throughout.
inline std::vector<Bytes> apportion(Bytes total, std::span<const unsigned __int128> weights) {
  unsigned __int128 sum = 0;
  for (auto w : weights) sum += w;
  if (sum == 0) throw Error("zero-demand", "total weighted demand is zero");

  std::vector<Bytes> out(weights.size());
  std::vector<unsigned __int128> rem(weights.size());
  Bytes assigned = 0;
  for (std::size_t q = 0; q < weights.size(); ++q) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(total) * weights[q];
    out[q] = static_cast<Bytes>(prod / sum);
    rem[q] = prod % sum;
    assigned += out[q];
  }
  std::vector<std::size_t> idx(weights.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (rem[a] != rem[b]) return rem[a] > rem[b];
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return a < b;
  });
  for (Bytes left = total - assigned, i = 0; left > 0; --left, ++i) ++out[idx[i % idx.size()]];
  return out;
}

inline std::vector<Bytes> apportion(Bytes total, std::span<const Bytes> weights) {
  std::vector<unsigned __int128> w(weights.begin(), weights.end());
  return apportion(total, std::span<const unsigned __int128>(w));
}

/// Per-region weighted demand bytes: sum over clients of the region of count * size.
inline std::vector<unsigned __int128> regionDemandBytes(const DemandHistory& history, const VideoCatalog& catalog,
                                                        std::span<const int> regionOfClient, std::size_t regions) {
  std::vector<unsigned __int128> w(regions, 0);
  for (std::size_t k = 0; k < history.counts.size(); ++k) {
    const int q = regionOfClient[k];
    for (const auto& [key, n] : history.counts[k])
      w.at(static_cast<std::size_t>(q)) += static_cast<unsigned __int128>(n) * catalog.sizeOf(key);
  }
  return w;
}

/// Per-MEC cache sizes from historical demand.
inline std::vector<Bytes> allocateCacheSizes(const DemandHistory& history, const VideoCatalog& catalog, Bytes total,
                                             std::span<const int> regionOfClient, std::size_t regions) {
  auto w = regionDemandBytes(history, catalog, regionOfClient, regions);
  return apportion(total, std::span<const unsigned __int128>(w));
}

}  // namespace edgecache
