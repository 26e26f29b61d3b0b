#pragma once

// Per-MEC steps of the proposed cache update, run at every short-period
// boundary: request utilities, placement solve, space release, fetches under
// the link budgets, and the delete-priority update at the end of the period.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/catalog.hpp"
#include "edgecache/client.hpp"
#include "edgecache/coop.hpp"
#include "edgecache/solver.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct ProposedConfig {
  double omega = 2.0;
  double segmentSeconds = 2.0;
  double maxBufferSeconds = 6.0;
  DeleteWeights weights;
  std::size_t nodeLimit = 1'000'000;
};

/// A client's upcoming segment requests, head first.
struct ClientQueue {
  std::uint32_t client = 0;  // index into the client array
  std::vector<SegmentKey> keys;
};

/// Utility of every queued request of the region's clients.
inline std::vector<RequestUtility> requestUtilities(std::span<const ClientState> clients,
                                                    std::span<const ClientQueue> queues, const AvailabilityView& view,
                                                    int q, const VideoCatalog& catalog, const ProposedConfig& cfg) {
  std::vector<RequestUtility> out;
  for (const auto& cq : queues) {
    const ClientState& c = clients[cq.client];
    std::vector<Bytes> sizes;
    sizes.reserve(cq.keys.size());
    for (const auto& k : cq.keys) sizes.push_back(catalog.sizeOf(k));
    const auto pr = queuePriorities(c, sizes, cfg.segmentSeconds, cfg.maxBufferSeconds, cfg.omega);
    for (std::size_t j = 0; j < cq.keys.size(); ++j) {
      const auto chi = view.row(q, cq.keys[j]);
      out.push_back({cq.client, cq.keys[j], clientUtility(pr[j], chi)});
    }
  }
  return out;
}

inline PlacementProblem toPlacementProblem(std::span<const CandidateItem> items, Bytes capacity,
                                           const TransferBudget& budget) {
  PlacementProblem p;
  p.capacity = capacity;
  for (int n : budget.neighbors()) p.neighborBudgets.push_back(budget.neighborRemaining(n));
  p.cloudBudget = budget.cloudRemaining();
  for (const auto& c : items) p.items.push_back({c.utility, c.size, c.neighborCost, c.cloudCost});
  return p;
}

struct Fetch {
  SegmentKey key;
  Bytes size = 0;
  Source source;
};

struct PlacementOutcome {
  std::vector<CandidateItem> candidates;  // positive utility, solver input order
  PlacementSolution solution;
  Bytes deleteBytes = 0;  // space released for the selection
  std::vector<SegmentKey> evicted;
  std::vector<Fetch> fetched;
  std::vector<SegmentKey> deferred;
  std::vector<Fetch> idleFills;  // zero-utility entries placed in free space
};

namespace detail {

inline bool tryFetch(CacheState& cache, const SegmentKey& k, Bytes size, Partition part, const AvailabilityView& view,
                     int q, TransferBudget& budget, std::vector<Fetch>& log) {
  const Source src = pickNeighborSource(k, size, view, q, budget);
  if (src.kind == SourceKind::Defer) return false;
  budget.charge(src, size);
  cache.insert(k, size, part);
  log.push_back({k, size, src});
  return true;
}

}  // namespace detail

/// Solves the placement for MEC `q`, releases the needed space in delete
/// priority order and fetches the selection. Entries whose aggregated utility
/// is zero carry no value for the objective; they are placed afterwards, in
/// candidate order, only into space that is already free.
inline PlacementOutcome placeAndFetch(CacheState& cache, std::span<const CandidateItem> candidates,
                                      const AvailabilityView& view, int q, TransferBudget& budget,
                                      const PopularitySet& pop, const ProposedConfig& cfg, bool fillIdleSpace) {
  PlacementOutcome out;
  std::vector<const CandidateItem*> idle;
  for (const auto& c : candidates) {
    if (cache.contains(c.key)) continue;
    if (c.utility > 0.0)
      out.candidates.push_back(c);
    else
      idle.push_back(&c);
  }

  const Bytes pinned = cache.pinnedSharedBytes();
  const Bytes capacity = cache.sharedBudget() > pinned ? cache.sharedBudget() - pinned : 0;
  const PlacementProblem prob = toPlacementProblem(out.candidates, capacity, budget);
  BranchOptions opt;
  opt.nodeLimit = cfg.nodeLimit;
  out.solution = branchAndBound(prob, opt);

  Bytes selectedBytes = 0;
  for (std::size_t j = 0; j < out.candidates.size(); ++j)
    if (out.solution.selected[j]) selectedBytes += out.candidates[j].size;
  const Bytes free = cache.freeShared();
  out.deleteBytes = selectedBytes > free ? selectedBytes - free : 0;
  out.evicted = evictForSpace(cache, out.deleteBytes);

  for (std::size_t j = 0; j < out.candidates.size(); ++j) {
    if (!out.solution.selected[j]) continue;
    const auto& c = out.candidates[j];
    if (!detail::tryFetch(cache, c.key, c.size, sharedPartitionFor(c.key.video, pop), view, q, budget, out.fetched))
      out.deferred.push_back(c.key);
  }

  if (fillIdleSpace) {
    for (const auto* c : idle) {
      if (c->size > cache.freeShared()) continue;
      detail::tryFetch(cache, c->key, c->size, sharedPartitionFor(c->key.video, pop), view, q, budget, out.idleFills);
    }
  }
  return out;
}

/// Fetches missing protected entries while the Delta1 budget and the links allow.
inline std::vector<Fetch> fetchDelta1(CacheState& cache, std::span<const SegmentKey> missing,
                                      const VideoCatalog& catalog, const AvailabilityView& view, int q,
                                      TransferBudget& budget) {
  std::vector<Fetch> log;
  for (const auto& k : missing) {
    if (cache.contains(k)) continue;
    const Bytes s = catalog.sizeOf(k);
    if (cache.usedDelta1() + s > cache.delta1Budget()) continue;
    detail::tryFetch(cache, k, s, Partition::Delta1, view, q, budget, log);
  }
  return log;
}

/// End-of-period delete priorities for every entry of one MEC from the
/// request counts and capacity estimates of the region's clients.
inline void updateDeletePriorities(CacheState& cache, std::span<const ClientState* const> region,
                                   const VideoCatalog& catalog, const DeleteWeights& w) {
  if (region.empty()) return;
  std::vector<ClientDemand> demand(region.size());
  for (const auto& [k, e] : cache.entries()) {
    const double rate = catalog.rateOf(k);
    for (std::size_t j = 0; j < region.size(); ++j)
      demand[j] = {region[j]->requestsFor(k), matchIndicator(region[j]->capacityBps(), rate)};
    applyDeletePriority(*cache.find(k), deletePriority(demand, w.zeta, w.alpha), w.lambda);
  }
}

}  // namespace edgecache
