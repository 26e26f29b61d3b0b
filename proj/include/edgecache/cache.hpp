#pragma once

// Partitioned MEC cache: protected popular prefixes (Delta1), popular-video
// remainders (Delta2) and non-popular videos (Delta3). Delta2 and Delta3 share
// one budget and one eviction order.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgecache/catalog.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

enum class Partition : std::uint8_t { Delta1 = 1, Delta2 = 2, Delta3 = 3 };

inline const char* toString(Partition p) {
  switch (p) {
    case Partition::Delta1: return "D1";
    case Partition::Delta2: return "D2";
    case Partition::Delta3: return "D3";
  }
  return "?";
}

struct CacheEntry {
  SegmentKey key;
  Bytes size = 0;
  Partition partition = Partition::Delta3;
  double smoothedPriority = 0.0;  // EWMA delete priority
  bool hasPriority = false;
  std::uint32_t inFlight = 0;  // active transfers reading this entry

  bool shared() const { return partition != Partition::Delta1; }
};

struct DeleteWeights {
  double zeta = 0.8;
  double alpha = 0.5;
  double lambda = 0.8;
};

class CacheState {
 public:
  CacheState() = default;
  CacheState(int mec, Bytes capacity) : mec_(mec), capacity_(capacity), sharedBudget_(capacity) {}

  int mec() const { return mec_; }
  Bytes capacity() const { return capacity_; }
  Bytes delta1Budget() const { return delta1Budget_; }
  Bytes sharedBudget() const { return sharedBudget_; }
  Bytes used() const { return used1_ + usedShared_; }
  Bytes usedDelta1() const { return used1_; }
  Bytes usedShared() const { return usedShared_; }
  Bytes free() const { return capacity_ - used(); }
  Bytes freeShared() const { return usedShared_ >= sharedBudget_ ? 0 : sharedBudget_ - usedShared_; }
  std::size_t count() const { return entries_.size(); }

  const std::map<SegmentKey, CacheEntry>& entries() const { return entries_; }

  bool contains(const SegmentKey& k) const { return entries_.contains(k); }

  const CacheEntry* find(const SegmentKey& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? nullptr : &it->second;
  }
  CacheEntry* find(const SegmentKey& k) {
    auto it = entries_.find(k);
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// Sets the partition budgets; they must sum to the capacity.
  void setBudgets(Bytes delta1, Bytes shared) {
    if (delta1 + shared != capacity_) throw Error("budget-mismatch", "SH + SC must equal the cache capacity");
    delta1Budget_ = delta1;
    sharedBudget_ = shared;
  }

  /// Inserts a new entry, enforcing uniqueness and the partition budget.
  CacheEntry& insert(const SegmentKey& k, Bytes size, Partition p) {
    if (entries_.contains(k)) throw Error("duplicate-key", "already cached " + toString(k));
    if (p == Partition::Delta1) {
      if (used1_ + size > delta1Budget_) throw Error("insufficient-space", "Delta1 budget exceeded");
    } else if (usedShared_ + size > sharedBudget_) {
      throw Error("insufficient-space", "Delta2/Delta3 budget exceeded");
    }
    auto& e = entries_[k];
    e.key = k;
    e.size = size;
    e.partition = p;
    account(e, +1);
    return e;
  }

  void erase(const SegmentKey& k) {
    auto it = entries_.find(k);
    if (it == entries_.end()) throw Error("missing-key", "not cached " + toString(k));
    if (it->second.inFlight > 0) throw Error("in-flight", "cannot delete an entry being transmitted");
    account(it->second, -1);
    entries_.erase(it);
  }

  /// Moves an entry between partitions without budget checks; callers restore
  /// the budget invariant afterwards.
  void retag(const SegmentKey& k, Partition p) {
    auto* e = find(k);
    if (!e || e->partition == p) return;
    account(*e, -1);
    e->partition = p;
    account(*e, +1);
  }

  void beginTransfer(const SegmentKey& k) {
    if (auto* e = find(k)) ++e->inFlight;
  }
  void endTransfer(const SegmentKey& k) {
    if (auto* e = find(k); e && e->inFlight > 0) --e->inFlight;
  }

  Bytes pinnedSharedBytes() const {
    Bytes b = 0;
    for (const auto& [k, e] : entries_)
      if (e.shared() && e.inFlight > 0) b += e.size;
    return b;
  }

  /// Empty when every structural invariant holds.
  std::vector<std::string> checkInvariants() const {
    std::vector<std::string> v;
    Bytes u1 = 0, us = 0;
    for (const auto& [k, e] : entries_) (e.partition == Partition::Delta1 ? u1 : us) += e.size;
    if (u1 != used1_ || us != usedShared_) v.push_back("usage counters out of sync");
    if (used() > capacity_) v.push_back("capacity exceeded");
    if (used1_ > delta1Budget_) v.push_back("Delta1 budget exceeded");
    if (usedShared_ > sharedBudget_) v.push_back("Delta2/Delta3 budget exceeded");
    if (delta1Budget_ + sharedBudget_ != capacity_) v.push_back("SH + SC != S_q");
    return v;
  }

 private:
  void account(const CacheEntry& e, int sign) {
    Bytes& u = e.partition == Partition::Delta1 ? used1_ : usedShared_;
    if (sign > 0)
      u += e.size;
    else
      u -= e.size;
  }

  int mec_ = 0;
  Bytes capacity_ = 0;
  Bytes delta1Budget_ = 0;
  Bytes sharedBudget_ = 0;
  Bytes used1_ = 0;
  Bytes usedShared_ = 0;
  std::map<SegmentKey, CacheEntry> entries_;
};

// ---------------------------------------------------------------------------
// Delete priority

/// One client's view of an entry within the current short period.
struct ClientDemand {
  std::uint32_t requests = 0;  // g
  int match = 0;               // v
};

/// Mean over the region's clients of 1 / (g + zeta * v + alpha).
inline double deletePriority(std::span<const ClientDemand> clients, double zeta, double alpha) {
  if (clients.empty()) throw Error("empty-region", "delete priority needs at least one client");
  double sum = 0.0;
  for (const auto& c : clients) sum += 1.0 / (static_cast<double>(c.requests) + zeta * c.match + alpha);
  return sum / static_cast<double>(clients.size());
}

inline double smoothDeletePriority(std::optional<double> previous, double current, double lambda) {
  if (!previous) return current;
  return lambda * current + (1.0 - lambda) * *previous;
}

inline void applyDeletePriority(CacheEntry& e, double dp, double lambda) {
  e.smoothedPriority =
      smoothDeletePriority(e.hasPriority ? std::optional<double>(e.smoothedPriority) : std::nullopt, dp, lambda);
  e.hasPriority = true;
}

// ---------------------------------------------------------------------------
// Eviction

/// Evictable shared entries ordered for deletion: smoothed priority desc,
/// size desc, key asc. Delta1 and in-flight entries are excluded.
inline std::vector<SegmentKey> evictionOrder(const CacheState& cache) {
  std::vector<const CacheEntry*> es;
  for (const auto& [k, e] : cache.entries())
    if (e.shared() && e.inFlight == 0) es.push_back(&e);
  std::sort(es.begin(), es.end(), [](const CacheEntry* a, const CacheEntry* b) {
    if (a->smoothedPriority != b->smoothedPriority) return a->smoothedPriority > b->smoothedPriority;
    if (a->size != b->size) return a->size > b->size;
    return a->key < b->key;
  });
  std::vector<SegmentKey> out;
  out.reserve(es.size());
  for (auto* e : es) out.push_back(e->key);
  return out;
}

inline Bytes evictableBytes(const CacheState& cache) {
  Bytes b = 0;
  for (const auto& [k, e] : cache.entries())
    if (e.shared() && e.inFlight == 0) b += e.size;
  return b;
}

/// Deletes shared entries in eviction order until at least `need` bytes are
/// freed. Throws "insufficient-space" (and deletes nothing) when the evictable
/// bytes cannot cover `need`.
inline std::vector<SegmentKey> evictForSpace(CacheState& cache, Bytes need) {
  std::vector<SegmentKey> evicted;
  if (need == 0) return evicted;
  if (evictableBytes(cache) < need)
    throw Error("insufficient-space", "cannot free " + std::to_string(need) + " bytes");
  Bytes freed = 0;
  for (const auto& k : evictionOrder(cache)) {
    if (freed >= need) break;
    freed += cache.find(k)->size;
    cache.erase(k);
    evicted.push_back(k);
  }
  return evicted;
}

// ---------------------------------------------------------------------------
// Initial fill

inline Partition sharedPartitionFor(std::uint32_t video, const PopularitySet& pop) {
  return pop.isPopular(video) ? Partition::Delta2 : Partition::Delta3;
}

/// Warm start from history. Popular videos, in rank order, contribute their
/// prefix segments at the historically most requested level to Delta1 until a
/// segment no longer fits; the remaining space takes other demanded entries in
/// descending historical count. Sets SH to the Delta1 usage.
inline void initialFill(CacheState& cache, const VideoCatalog& catalog, const PopularitySet& pop,
                        const std::map<SegmentKey, std::uint64_t>& demand) {
  if (cache.count() != 0) throw Error("not-empty", "initial fill requires an empty cache");
  cache.setBudgets(cache.capacity(), 0);

  std::map<std::uint32_t, std::uint64_t> levelTotals;
  for (const auto& [k, n] : demand) levelTotals[k.level] += n;
  std::uint32_t fallbackLevel = 1;
  std::uint64_t best = 0;
  for (const auto& [l, n] : levelTotals)
    if (n > best) best = n, fallbackLevel = l;

  auto mostRequestedLevel = [&](std::uint32_t f, std::uint32_t i) {
    std::uint32_t lvl = fallbackLevel;
    std::uint64_t top = 0;
    for (std::uint32_t l = 1; l <= catalog.levels(); ++l) {
      auto it = demand.find(SegmentKey{f, i, l});
      if (it != demand.end() && it->second > top) top = it->second, lvl = l;
    }
    return lvl;
  };

  bool full = false;
  for (auto f : pop.popular()) {
    const Video& v = catalog.video(f);
    for (std::uint32_t i = 1; i <= v.prefix; ++i) {
      const SegmentKey k{f, i, mostRequestedLevel(f, i)};
      const Bytes s = catalog.sizeOf(k);
      if (cache.used() + s > cache.capacity()) {
        full = true;
        break;
      }
      cache.insert(k, s, Partition::Delta1);
    }
    if (full) break;
  }

  const Bytes sh = cache.usedDelta1();
  cache.setBudgets(sh, cache.capacity() - sh);

  std::vector<std::pair<SegmentKey, std::uint64_t>> ranked(demand.begin(), demand.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [k, n] : ranked) {
    if (n == 0 || cache.contains(k) || !catalog.valid(k)) continue;
    const Bytes s = catalog.sizeOf(k);
    if (s > cache.freeShared()) continue;
    cache.insert(k, s, sharedPartitionFor(k.video, pop));
  }
}

// ---------------------------------------------------------------------------
// Long-period Delta1 refresh with cache space transfer

struct Delta1Refresh {
  std::int64_t transfer = 0;  // FC: bytes moved from the shared area into Delta1
  Bytes targetBytes = 0;
  std::vector<SegmentKey> evicted;
  std::vector<SegmentKey> toFetch;  // target entries not present locally
  bool capped = false;              // in-flight entries limited the transfer
};

/// All levels of the prefix segments of every popular video.
inline std::vector<SegmentKey> delta1Target(const VideoCatalog& catalog, const PopularitySet& pop) {
  std::vector<SegmentKey> t;
  for (auto f : pop.popular()) {
    const Video& v = catalog.video(f);
    for (std::uint32_t i = 1; i <= v.prefix; ++i)
      for (std::uint32_t l = 1; l <= catalog.levels(); ++l) t.push_back({f, i, l});
  }
  return t;
}

/// Re-targets Delta1 at the current popular set and transfers space between
/// Delta1 and the shared area: FC = target bytes - SH_prev, SC = SC_prev - FC.
/// Shared entries are evicted in delete-priority order until the shared area
/// fits its new budget. Missing target entries are returned for fetching.
inline Delta1Refresh refreshDelta1(CacheState& cache, const VideoCatalog& catalog, const PopularitySet& pop) {
  Delta1Refresh r;
  const auto target = delta1Target(catalog, pop);
  for (const auto& k : target) r.targetBytes += catalog.sizeOf(k);
  if (r.targetBytes > cache.capacity())
    throw Error("delta1-overflow", "popular prefixes need " + std::to_string(r.targetBytes) +
                                       " bytes but the cache holds " + std::to_string(cache.capacity()));

  const std::map<SegmentKey, bool> inTarget = [&] {
    std::map<SegmentKey, bool> m;
    for (const auto& k : target) m.emplace(k, true);
    return m;
  }();

  std::vector<std::pair<SegmentKey, Partition>> moves;
  for (const auto& [k, e] : cache.entries()) {
    Partition want = inTarget.contains(k) ? Partition::Delta1 : sharedPartitionFor(k.video, pop);
    if (want != e.partition) moves.emplace_back(k, want);
  }
  for (const auto& [k, p] : moves) cache.retag(k, p);

  const Bytes shPrev = cache.delta1Budget();
  const Bytes scPrev = cache.sharedBudget();
  r.transfer = static_cast<std::int64_t>(r.targetBytes) - static_cast<std::int64_t>(shPrev);
  Bytes scNew = static_cast<Bytes>(static_cast<std::int64_t>(scPrev) - r.transfer);

  if (cache.usedShared() > scNew) {
    const Bytes need = cache.usedShared() - scNew;
    const Bytes evictable = evictableBytes(cache);
    if (evictable >= need) {
      r.evicted = evictForSpace(cache, need);
    } else {
      r.evicted = evictForSpace(cache, evictable);
      scNew = cache.usedShared();
      r.capped = true;
      r.transfer = static_cast<std::int64_t>(scPrev) - static_cast<std::int64_t>(scNew);
    }
  }
  cache.setBudgets(cache.capacity() - scNew, scNew);

  for (const auto& k : target)
    if (!cache.contains(k)) r.toFetch.push_back(k);
  return r;
}

}  // namespace edgecache
