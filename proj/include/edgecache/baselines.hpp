#pragma once

// Reactive replacement policies used for comparison. Each instance manages the
// metadata of one MEC; the cache contents themselves live in CacheState, used
// as a single unpartitioned store (Delta1 budget 0). On a miss the simulator
// asks for a PolicyDecision and, if the fill fits the link budget, applies it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/coop.hpp"
#include "edgecache/scenario.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct PolicyDecision {
  bool insert = false;
  SegmentKey key;
  Bytes size = 0;
  std::vector<SegmentKey> evict;  // applied in order, before the insert
};

class ReplacementPolicy {
 public:
  virtual ~ReplacementPolicy() = default;

  /// Metadata for an entry placed by the warm start. Called from least to
  /// most demanded.
  virtual void warm(const SegmentKey& k, Bytes size, std::uint64_t historicalCount) = 0;
  /// Every request seen by this MEC, before any decision.
  virtual void onRequest(const SegmentKey& k, Bytes size, bool hit, double now) = 0;
  virtual PolicyDecision onMiss(const CacheState& cache, const SegmentKey& k, Bytes size, double now) = 0;
  virtual void onInserted(const SegmentKey& k, Bytes size, double now) = 0;
  virtual void onEvicted(const SegmentKey& k) = 0;
  /// Short-period boundary with the frozen availability of all MECs.
  virtual void onPeriodStart(const AvailabilityView& /*view*/, int /*mec*/, double /*now*/) {}
};

namespace detail {

/// Walks `order` (lowest value first) collecting victims that are not in
/// flight until `need` bytes are freed. Empty optional when impossible.
template <typename Order, typename KeyOf>
std::optional<std::vector<SegmentKey>> pickVictims(const CacheState& cache, Bytes need, const Order& order,
                                                   KeyOf&& keyOf) {
  std::vector<SegmentKey> victims;
  Bytes freed = 0;
  for (const auto& item : order) {
    if (freed >= need) break;
    const SegmentKey& k = keyOf(item);
    const CacheEntry* e = cache.find(k);
    if (!e || e->inFlight > 0) continue;
    victims.push_back(k);
    freed += e->size;
  }
  if (freed < need) return std::nullopt;
  return victims;
}

inline Bytes shortfall(const CacheState& cache, Bytes size) {
  const Bytes free = cache.freeShared();
  return size > free ? size - free : 0;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Evicts the least recently requested entry.
class LruPolicy final : public ReplacementPolicy {
 public:
  void warm(const SegmentKey& k, Bytes, std::uint64_t) override { touch(k); }

  void onRequest(const SegmentKey& k, Bytes, bool hit, double) override {
    if (hit) touch(k);
  }

  PolicyDecision onMiss(const CacheState& cache, const SegmentKey& k, Bytes size, double) override {
    PolicyDecision d{false, k, size, {}};
    if (size > cache.sharedBudget()) return d;
    auto victims = detail::pickVictims(cache, detail::shortfall(cache, size), order_,
                                       [](const auto& p) -> const SegmentKey& { return p.second; });
    if (!victims) return d;
    d.insert = true;
    d.evict = std::move(*victims);
    return d;
  }

  void onInserted(const SegmentKey& k, Bytes, double) override { touch(k); }

  void onEvicted(const SegmentKey& k) override {
    if (auto it = stamp_.find(k); it != stamp_.end()) {
      order_.erase({it->second, k});
      stamp_.erase(it);
    }
  }

  /// Keys from least to most recently used.
  std::vector<SegmentKey> recency() const {
    std::vector<SegmentKey> v;
    for (const auto& [t, k] : order_) v.push_back(k);
    return v;
  }

 private:
  void touch(const SegmentKey& k) {
    if (auto it = stamp_.find(k); it != stamp_.end()) order_.erase({it->second, k});
    stamp_[k] = ++clock_;
    order_.insert({clock_, k});
  }

  std::uint64_t clock_ = 0;
  std::map<SegmentKey, std::uint64_t> stamp_;
  std::set<std::pair<std::uint64_t, SegmentKey>> order_;
};

// ---------------------------------------------------------------------------

/// Evicts the entry with the lowest cumulative request count at this MEC;
/// ties go to the older insertion. Counts survive eviction.
class LfuPolicy final : public ReplacementPolicy {
 public:
  void warm(const SegmentKey& k, Bytes, std::uint64_t historicalCount) override {
    counts_[k] += historicalCount;
    place(k);
  }

  void onRequest(const SegmentKey& k, Bytes, bool, double) override {
    auto it = slot_.find(k);
    if (it != slot_.end()) order_.erase(it->second);
    ++counts_[k];
    if (it != slot_.end()) {
      it->second = {counts_[k], std::get<1>(it->second), k};
      order_.insert(it->second);
    }
  }

  PolicyDecision onMiss(const CacheState& cache, const SegmentKey& k, Bytes size, double) override {
    PolicyDecision d{false, k, size, {}};
    if (size > cache.sharedBudget()) return d;
    auto victims = detail::pickVictims(cache, detail::shortfall(cache, size), order_,
                                       [](const Slot& s) -> const SegmentKey& { return std::get<2>(s); });
    if (!victims) return d;
    d.insert = true;
    d.evict = std::move(*victims);
    return d;
  }

  void onInserted(const SegmentKey& k, Bytes, double) override { place(k); }

  void onEvicted(const SegmentKey& k) override {
    if (auto it = slot_.find(k); it != slot_.end()) {
      order_.erase(it->second);
      slot_.erase(it);
    }
  }

  std::uint64_t count(const SegmentKey& k) const {
    auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
  }

 private:
  using Slot = std::tuple<std::uint64_t, std::uint64_t, SegmentKey>;  // count, insertion seq, key

  void place(const SegmentKey& k) {
    if (auto it = slot_.find(k); it != slot_.end()) order_.erase(it->second);
    Slot s{counts_[k], ++seq_, k};
    slot_[k] = s;
    order_.insert(s);
  }

  std::uint64_t seq_ = 0;
  std::map<SegmentKey, std::uint64_t> counts_;
  std::map<SegmentKey, Slot> slot_;
  std::set<Slot> order_;
};

// ---------------------------------------------------------------------------

/// Greedy-Dual-Size-Frequency with a time-decayed frequency and a per-type
/// weight: H = L + timeWeight * F * typeWeight / size, where F counts requests
/// while cached, each halving in weight every `halfLifeSeconds` (0 disables
/// decay, which is plain GDSF). The inflation L becomes the H of each victim.
class WgdsfPolicy final : public ReplacementPolicy {
 public:
  WgdsfPolicy(double timeWeight = 1.0, double typeWeight = 1.0, double halfLifeSeconds = 0.0)
      : timeWeight_(timeWeight), typeWeight_(typeWeight), halfLife_(halfLifeSeconds) {}

  void warm(const SegmentKey& k, Bytes size, std::uint64_t historicalCount) override {
    set(k, size, static_cast<double>(std::max<std::uint64_t>(historicalCount, 1)), 0.0);
  }

  void onRequest(const SegmentKey& k, Bytes, bool hit, double now) override {
    if (!hit) return;
    auto it = meta_.find(k);
    if (it == meta_.end()) return;
    const Meta m = it->second;
    set(k, m.size, m.frequency * decay(now - m.since) + 1.0, now);
  }

  PolicyDecision onMiss(const CacheState& cache, const SegmentKey& k, Bytes size, double) override {
    PolicyDecision d{false, k, size, {}};
    if (size > cache.sharedBudget()) return d;
    auto victims = detail::pickVictims(cache, detail::shortfall(cache, size), order_,
                                       [](const Slot& s) -> const SegmentKey& { return std::get<2>(s); });
    if (!victims) return d;
    d.insert = true;
    d.evict = std::move(*victims);
    return d;
  }

  void onInserted(const SegmentKey& k, Bytes size, double now) override { set(k, size, 1.0, now); }

  void onEvicted(const SegmentKey& k) override {
    auto it = meta_.find(k);
    if (it == meta_.end()) return;
    inflation_ = std::max(inflation_, it->second.h);
    order_.erase({it->second.h, it->second.seq, k});
    meta_.erase(it);
  }

  double inflation() const { return inflation_; }
  double priority(const SegmentKey& k) const { return meta_.at(k).h; }

 private:
  struct Meta {
    Bytes size = 0;
    double frequency = 0.0;
    double since = 0.0;
    double h = 0.0;
    std::uint64_t seq = 0;
  };
  using Slot = std::tuple<double, std::uint64_t, SegmentKey>;  // H, seq, key

  double decay(double elapsed) const {
    if (halfLife_ <= 0.0 || elapsed <= 0.0) return 1.0;
    return std::exp2(-elapsed / halfLife_);
  }

  void set(const SegmentKey& k, Bytes size, double frequency, double now) {
    if (auto it = meta_.find(k); it != meta_.end()) order_.erase({it->second.h, it->second.seq, k});
    Meta m{size, frequency, now, 0.0, ++seq_};
    m.h = inflation_ + timeWeight_ * frequency * typeWeight_ / static_cast<double>(std::max<Bytes>(size, 1));
    meta_[k] = m;
    order_.insert({m.h, m.seq, k});
  }

  double timeWeight_;
  double typeWeight_;
  double halfLife_;
  double inflation_ = 0.0;
  std::uint64_t seq_ = 0;
  std::map<SegmentKey, Meta> meta_;
  std::set<Slot> order_;
};

// ---------------------------------------------------------------------------

/// Cooperation-aware value: the cumulative local request count, discounted by
/// `discount` when a neighbor already caches the entry (it can be fetched
/// collaboratively). Evicts the lowest value and inserts only when the new
/// entry is worth more than every victim. Neighbor state is the snapshot of
/// the current short period.
class RbccPolicy final : public ReplacementPolicy {
 public:
  explicit RbccPolicy(double discount = 0.5) : discount_(discount) {}

  void warm(const SegmentKey& k, Bytes, std::uint64_t historicalCount) override {
    counts_[k] += historicalCount;
    place(k);
  }

  void onRequest(const SegmentKey& k, Bytes, bool, double) override {
    ++counts_[k];
    if (slot_.contains(k)) place(k);
  }

  PolicyDecision onMiss(const CacheState& cache, const SegmentKey& k, Bytes size, double) override {
    PolicyDecision d{false, k, size, {}};
    if (size > cache.sharedBudget()) return d;
    auto victims = detail::pickVictims(cache, detail::shortfall(cache, size), order_,
                                       [](const Slot& s) -> const SegmentKey& { return std::get<2>(s); });
    if (!victims) return d;
    const double incoming = value(k);
    for (const auto& v : *victims)
      if (!(incoming > std::get<0>(slot_.at(v)))) return d;
    d.insert = true;
    d.evict = std::move(*victims);
    return d;
  }

  void onInserted(const SegmentKey& k, Bytes, double) override { place(k); }

  void onEvicted(const SegmentKey& k) override {
    if (auto it = slot_.find(k); it != slot_.end()) {
      order_.erase(it->second);
      slot_.erase(it);
    }
  }

  /// Keeps a pointer to `view`; it must outlive the period.
  void onPeriodStart(const AvailabilityView& view, int mec, double) override {
    neighborView_ = &view;
    mec_ = mec;
    std::vector<SegmentKey> keys;
    for (const auto& [k, s] : slot_) keys.push_back(k);
    for (const auto& k : keys) place(k);
  }

  double value(const SegmentKey& k) const {
    auto it = counts_.find(k);
    const double n = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
    return neighborHas(k) ? discount_ * n : n;
  }

 private:
  using Slot = std::tuple<double, std::uint64_t, SegmentKey>;  // value, insertion seq, key

  bool neighborHas(const SegmentKey& k) const {
    if (!neighborView_) return false;
    for (int p : neighborView_->neighbors(mec_))
      if (neighborView_->stores(p, k)) return true;
    return false;
  }

  void place(const SegmentKey& k) {
    std::uint64_t seq = ++seq_;
    if (auto it = slot_.find(k); it != slot_.end()) {
      seq = std::get<1>(it->second);
      order_.erase(it->second);
    }
    Slot s{value(k), seq, k};
    slot_[k] = s;
    order_.insert(s);
  }

  double discount_;
  std::uint64_t seq_ = 0;
  std::map<SegmentKey, std::uint64_t> counts_;
  std::map<SegmentKey, Slot> slot_;
  std::set<Slot> order_;
  const AvailabilityView* neighborView_ = nullptr;
  int mec_ = 0;
};

inline std::unique_ptr<ReplacementPolicy> makeReplacementPolicy(const PolicyParams& p, double periodSeconds) {
  switch (p.policy) {
    case PolicyKind::Lru: return std::make_unique<LruPolicy>();
    case PolicyKind::Lfu: return std::make_unique<LfuPolicy>();
    case PolicyKind::Wgdsf:
      return std::make_unique<WgdsfPolicy>(p.wgdsfTimeWeight, p.wgdsfTypeWeight,
                                           p.wgdsfHalfLifePeriods * periodSeconds);
    case PolicyKind::Rbcc: return std::make_unique<RbccPolicy>(p.rbccDiscount);
    default: return nullptr;
  }
}

}  // namespace edgecache
