#pragma once

// Multi-MEC cooperation: availability snapshots, per-link transfer budgets,
// client utilities and their aggregation into placement candidates.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

/// Which MECs store which entries, frozen at a period boundary.
class AvailabilityView {
 public:
  AvailabilityView() = default;

  /// `neighbors[q]` lists the MECs adjacent to q, in ascending id order.
  AvailabilityView(std::span<const CacheState> caches, std::vector<std::vector<int>> neighbors)
      : neighbors_(std::move(neighbors)), stored_(caches.size()) {
    for (std::size_t q = 0; q < caches.size(); ++q)
      for (const auto& [k, e] : caches[q].entries()) stored_[q].insert(k);
  }

  /// Builds a view from explicit key sets (tests, offline tooling).
  AvailabilityView(std::vector<std::set<SegmentKey>> stored, std::vector<std::vector<int>> neighbors)
      : neighbors_(std::move(neighbors)), stored_(std::move(stored)) {}

  std::size_t mecCount() const { return stored_.size(); }
  std::span<const int> neighbors(int q) const { return neighbors_.at(static_cast<std::size_t>(q)); }
  bool stores(int p, const SegmentKey& k) const { return stored_.at(static_cast<std::size_t>(p)).contains(k); }

  /// chi over q's neighbors, in neighbor order.
  std::vector<std::uint8_t> row(int q, const SegmentKey& k) const {
    std::vector<std::uint8_t> r;
    for (int p : neighbors(q)) r.push_back(stores(p, k) ? 1 : 0);
    return r;
  }

 private:
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::set<SegmentKey>> stored_;
};

/// Per-period cache-fill budgets of one MEC: one per neighbor link plus the
/// cloud link. Capacities in bit/s, budgets and consumption in bytes.
class TransferBudget {
 public:
  TransferBudget() = default;
  TransferBudget(std::vector<int> neighbors, std::vector<double> neighborCapacityBps, double cloudCapacityBps,
                 double periodSeconds)
      : neighbors_(std::move(neighbors)),
        neighborBudget_(neighborCapacityBps.size()),
        neighborUsed_(neighborCapacityBps.size(), 0) {
    for (std::size_t i = 0; i < neighborCapacityBps.size(); ++i)
      neighborBudget_[i] = bytesFor(neighborCapacityBps[i], periodSeconds);
    cloudBudget_ = bytesFor(cloudCapacityBps, periodSeconds);
  }

  static Bytes bytesFor(double bps, double seconds) { return static_cast<Bytes>(bps * seconds / 8.0); }

  std::span<const int> neighbors() const { return neighbors_; }
  std::size_t indexOf(int p) const {
    auto it = std::find(neighbors_.begin(), neighbors_.end(), p);
    if (it == neighbors_.end()) throw Error("unknown-neighbor", "MEC " + std::to_string(p) + " is not adjacent");
    return static_cast<std::size_t>(it - neighbors_.begin());
  }

  Bytes neighborBudget(int p) const { return neighborBudget_[indexOf(p)]; }
  Bytes neighborUsed(int p) const { return neighborUsed_[indexOf(p)]; }
  Bytes neighborRemaining(int p) const { return neighborBudget(p) - neighborUsed(p); }
  Bytes cloudBudget() const { return cloudBudget_; }
  Bytes cloudUsed() const { return cloudUsed_; }
  Bytes cloudRemaining() const { return cloudBudget_ - cloudUsed_; }

  bool canCharge(const Source& s, Bytes bytes) const {
    if (s.kind == SourceKind::Cloud) return bytes <= cloudRemaining();
    if (s.kind == SourceKind::Neighbor) return bytes <= neighborRemaining(s.mec);
    return s.kind == SourceKind::Local;
  }

  void charge(const Source& s, Bytes bytes) {
    if (!canCharge(s, bytes)) throw Error("budget-exceeded", "transfer exceeds the link budget");
    if (s.kind == SourceKind::Cloud) cloudUsed_ += bytes;
    if (s.kind == SourceKind::Neighbor) neighborUsed_[indexOf(s.mec)] += bytes;
  }

  void reset() {
    std::fill(neighborUsed_.begin(), neighborUsed_.end(), 0);
    cloudUsed_ = 0;
  }

 private:
  std::vector<int> neighbors_;
  std::vector<Bytes> neighborBudget_;
  std::vector<Bytes> neighborUsed_;
  Bytes cloudBudget_ = 0;
  Bytes cloudUsed_ = 0;
};

/// Client utility: the priority counts twice when no neighbor holds the
/// segment and it has to come from the cloud.
inline double clientUtility(double priority, std::span<const std::uint8_t> chiRow) {
  double none = 1.0;
  for (auto c : chiRow) none *= (1.0 - c);
  return priority + priority * none;
}

struct RequestUtility {
  std::uint32_t client = 0;
  SegmentKey key;
  double utility = 0.0;
};

struct CandidateItem {
  SegmentKey key;
  Bytes size = 0;
  double utility = 0.0;         // Ps: summed client utilities
  std::uint32_t requesters = 0;  // number of contributing requests
  std::vector<Bytes> neighborCost;  // A^p, one per neighbor of the MEC
  Bytes cloudCost = 0;              // B
};

/// Groups requests of MEC `q` by entry and sums their utilities. Requests for
/// entries already stored at q are dropped. Output order: utility desc,
/// requesters desc, key asc.
template <typename SizeOf>
std::vector<CandidateItem> aggregateUtilities(std::span<const RequestUtility> requests, const AvailabilityView& view,
                                              int q, SizeOf&& sizeOf) {
  std::map<SegmentKey, CandidateItem> grouped;
  for (const auto& r : requests) {
    if (view.stores(q, r.key)) continue;
    auto [it, fresh] = grouped.try_emplace(r.key);
    CandidateItem& item = it->second;
    if (fresh) {
      item.key = r.key;
      item.size = sizeOf(r.key);
      bool anywhere = false;
      for (int p : view.neighbors(q)) {
        const bool has = view.stores(p, r.key);
        anywhere = anywhere || has;
        item.neighborCost.push_back(has ? item.size : 0);
      }
      item.cloudCost = anywhere ? 0 : item.size;
    }
    item.utility += r.utility;
    ++item.requesters;
  }
  std::vector<CandidateItem> out;
  out.reserve(grouped.size());
  for (auto& [k, item] : grouped) out.push_back(std::move(item));
  std::stable_sort(out.begin(), out.end(), [](const CandidateItem& a, const CandidateItem& b) {
    if (a.utility != b.utility) return a.utility > b.utility;
    return a.requesters > b.requesters;
  });
  return out;
}

/// Chooses where MEC q fetches a selected entry from. Among neighbors that
/// store it and still have budget for it, the one with the most remaining
/// budget wins (ties: lowest id). If no neighbor stores it, the cloud serves it
/// when its budget allows. Otherwise the fetch waits for the next period.
inline Source pickNeighborSource(const SegmentKey& k, Bytes size, const AvailabilityView& view, int q,
                                 const TransferBudget& budget) {
  bool storedSomewhere = false;
  int best = -1;
  Bytes bestRemaining = 0;
  for (int p : view.neighbors(q)) {
    if (!view.stores(p, k)) continue;
    storedSomewhere = true;
    const Bytes rem = budget.neighborRemaining(p);
    if (rem >= size && (best < 0 || rem > bestRemaining)) {
      best = p;
      bestRemaining = rem;
    }
  }
  if (best >= 0) return {SourceKind::Neighbor, best};
  if (storedSomewhere) return {SourceKind::Defer, -1};
  if (budget.cloudRemaining() >= size) return {SourceKind::Cloud, -1};
  return {SourceKind::Defer, -1};
}

}  // namespace edgecache
