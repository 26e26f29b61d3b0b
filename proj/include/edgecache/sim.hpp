#pragma once

// Discrete-event world: clients stream sessions segment by segment, each
// download served from the local MEC, a neighbor MEC or the cloud. Cache
// policies act at short-period boundaries (proposed) or on misses (baselines).

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "edgecache/baselines.hpp"
#include "edgecache/cache.hpp"
#include "edgecache/catalog.hpp"
#include "edgecache/client.hpp"
#include "edgecache/coop.hpp"
#include "edgecache/proposed.hpp"
#include "edgecache/scenario.hpp"
#include "edgecache/solver.hpp"
#include "edgecache/topology.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct TrafficStats {
  Bytes deliveredBytes = 0;
  double stallSeconds = 0.0;
  std::uint64_t requests = 0;
  std::uint64_t localHits = 0;
  std::uint64_t neighborFetches = 0;
  std::uint64_t cloudFetches = 0;
  Bytes backhaulBytes = 0;  // cloud-origin bytes
  Bytes intermecBytes = 0;  // neighbor-origin bytes

  TrafficStats& operator+=(const TrafficStats& o) {
    deliveredBytes += o.deliveredBytes;
    stallSeconds += o.stallSeconds;
    requests += o.requests;
    localHits += o.localHits;
    neighborFetches += o.neighborFetches;
    cloudFetches += o.cloudFetches;
    backhaulBytes += o.backhaulBytes;
    intermecBytes += o.intermecBytes;
    return *this;
  }
};

/// Per-MEC cache-fill traffic and placement activity within one period.
struct MecActivity {
  Bytes fillCloudBytes = 0;
  Bytes fillNeighborBytes = 0;
  std::size_t solverItems = 0;
  std::size_t solverNodes = 0;
  bool solverNodeLimit = false;
  std::size_t evicted = 0;
  std::int64_t delta1Transfer = 0;
};

struct PeriodRecord {
  std::uint32_t period = 0;      // short period, 1-based
  std::uint32_t longPeriod = 0;  // long period, 1-based
  std::vector<TrafficStats> clients;
  std::vector<TrafficStats> mecs;  // client traffic of the region plus fills
  std::vector<MecActivity> activity;
};

struct RunResult {
  PolicyKind policy = PolicyKind::Proposed;
  Bytes totalCacheBytes = 0;
  std::uint64_t seed = 0;
  double periodSeconds = 0.0;
  std::vector<Bytes> mecCapacity;
  std::vector<int> clientMec;
  std::vector<PeriodRecord> periods;
  std::vector<std::string> violations;  // empty when every audit passed
  std::size_t auditChecks = 0;
};

struct SimOptions {
  bool audit = true;
  bool fillIdleSpace = true;  // proposed: place zero-utility queued entries into free space
};

class Simulator {
 public:
  Simulator(const Scenario& sc, PolicyKind policy, Bytes totalCacheBytes, std::uint64_t seed, SimOptions opt = {})
      : sc_(sc), policy_(policy), seed_(seed), opt_(opt) {
    CatalogConfig cc = sc.catalog;
    cc.seed = seed;
    catalog_ = buildCatalog(cc);
    pop_ = PopularitySet::fromCatalog(catalog_, sc.catalog.popularFraction);
    topo_ = buildTopology(sc.topology, seed);
    zipf_ = std::make_unique<ZipfSampler>(catalog_.size(), sc.catalog.zipfTheta);
    segSeconds_ = catalog_.segmentSeconds();

    const std::size_t K = topo_.clientCount();
    const std::size_t Q = topo_.mecCount();
    result_.policy = policy;
    result_.totalCacheBytes = totalCacheBytes;
    result_.seed = seed;
    result_.periodSeconds = sc.coop.periodSeconds;
    result_.clientMec = topo_.clientMec;

    // Clients and their target levels.
    clients_.resize(K);
    rt_.reserve(K);
    for (std::uint32_t k = 0; k < K; ++k) {
      ClientState& c = clients_[k];
      c.id = k;
      c.mec = topo_.clientMec[k];
      c.enb = topo_.clientEnb[k];
      c.frameRate = catalog_.frameRate();
      c.bufferFrames = sc.client.initialBufferSeconds * c.frameRate;
      c.capacity.weight = sc.client.capacityEwma;
      rt_.emplace_back(SessionSource(seed, stream::kSession, k));
      rt_[k].cursor.client = k;
      rt_[k].cursor.targetLevel = targetLevel(nominalCapacity(topo_, sc.radio, k) * sc.client.targetHeadroom);
    }

    // Historical demand drives cache sizing and the warm start.
    DemandHistory history(K);
    for (std::uint32_t k = 0; k < K; ++k) {
      SessionSource hist(seed, stream::kHistory, k);
      for (std::uint32_t s = 0; s < sc.workload.historySessions; ++s) {
        const Session sess = hist.next(catalog_, pop_, *zipf_, sc.workload.abandonProbability);
        for (std::uint32_t i = 1; i <= sess.lastSegment; ++i)
          history.add(k, SegmentKey{sess.video, i, rt_[k].cursor.targetLevel});
      }
    }
    std::vector<Bytes> sizes;
    if (policy == PolicyKind::None)
      sizes.assign(Q, 0);
    else if (!sc.perMecCacheBytes.empty())
      sizes = sc.perMecCacheBytes;
    else
      sizes = allocateCacheSizes(history, catalog_, totalCacheBytes, topo_.clientMec, Q);
    result_.mecCapacity = sizes;

    for (std::size_t q = 0; q < Q; ++q) {
      caches_.emplace_back(static_cast<int>(q), sizes[q]);
      const auto demand = history.aggregate(topo_.regionClients[q]);
      if (policy == PolicyKind::Proposed) {
        initialFill(caches_[q], catalog_, pop_, demand);
        std::vector<SegmentKey> protectedKeys;
        for (const auto& [k, e] : caches_[q].entries())
          if (!e.shared()) protectedKeys.push_back(k);
        delta1Target_.push_back(std::move(protectedKeys));
      } else if (policy != PolicyKind::None) {
        PolicyParams params = sc.policy;
        params.policy = policy;
        policies_.push_back(makeReplacementPolicy(params, sc.coop.periodSeconds));
        warmFill(caches_[q], *policies_.back(), demand);
      }
      std::vector<double> caps(topo_.neighbors[q].size(), sc.coop.mecCapacityBps);
      budgets_.emplace_back(topo_.neighbors[q], caps, sc.coop.cloudCapacityBps, sc.coop.periodSeconds);
    }
    linkActive_.assign(Q + Q * Q, 0);
    for (std::uint32_t k = 0; k < K; ++k) schedule(k, 0.0, Event::Wake);
  }

  RunResult run() {
    while (period_ < sc_.totalShortPeriods()) step();
    return result_;
  }

  /// Runs one short period.
  void step() {
    ++period_;
    const double t0 = (period_ - 1) * sc_.coop.periodSeconds;
    const double t1 = period_ * sc_.coop.periodSeconds;
    beginPeriod(t0);
    while (!events_.empty() && events_.top().time < t1) {
      const auto ev = events_.top();
      events_.pop();
      handle(ev);
    }
    endPeriod(t1);
  }

  const VideoCatalog& catalog() const { return catalog_; }
  const Topology& topology() const { return topo_; }
  const PopularitySet& popularity() const { return pop_; }
  std::span<const CacheState> caches() const { return caches_; }
  std::span<const ClientState> clients() const { return clients_; }
  const TransferBudget& budget(int q) const { return budgets_.at(q); }
  const RunResult& result() const { return result_; }
  std::uint32_t period() const { return period_; }

 private:
  enum class Event : std::uint8_t { Wake, Complete };

  struct QueuedEvent {
    double time;
    std::uint64_t seq;
    std::uint32_t client;
    Event kind;
    bool operator>(const QueuedEvent& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  struct Download {
    SegmentKey key;
    Bytes size = 0;
    Source source;
    std::size_t link = 0;
    double start = 0.0;
  };

  struct Runtime {
    explicit Runtime(SessionSource s) : sessions(s) {}
    SessionSource sessions;
    Session session;
    PlaybackCursor cursor;
    double clock = 0.0;  // playback advanced up to here
    std::optional<Download> download;
  };

  std::uint32_t targetLevel(double bps) const {
    std::uint32_t level = 1;
    for (std::uint32_t l = 1; l <= catalog_.levels(); ++l)
      if (sc_.catalog.rateLadderBps[l - 1] <= bps) level = l;
    return level;
  }

  /// Unpartitioned warm start: most demanded entries first while they fit.
  /// Policy metadata is seeded from least to most demanded.
  void warmFill(CacheState& cache, ReplacementPolicy& policy, const std::map<SegmentKey, std::uint64_t>& demand) const {
    cache.setBudgets(0, cache.capacity());
    std::vector<std::pair<SegmentKey, std::uint64_t>> ranked(demand.begin(), demand.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::pair<SegmentKey, std::uint64_t>> placed;
    for (const auto& [k, n] : ranked) {
      if (n == 0 || !catalog_.valid(k)) continue;
      const Bytes s = catalog_.sizeOf(k);
      if (s > cache.freeShared()) continue;
      cache.insert(k, s, Partition::Delta3);
      placed.emplace_back(k, n);
    }
    for (auto it = placed.rbegin(); it != placed.rend(); ++it) policy.warm(it->first, catalog_.sizeOf(it->first), it->second);
  }

  void schedule(std::uint32_t k, double t, Event kind) { events_.push({t, seq_++, k, kind}); }

  TrafficStats& clientStats(std::uint32_t k) { return current_.clients[k]; }
  TrafficStats& mecStats(int q) { return current_.mecs[static_cast<std::size_t>(q)]; }

  void advance(std::uint32_t k, double t) {
    Runtime& r = rt_[k];
    if (t > r.clock) {
      const double stall = advancePlayback(clients_[k], t - r.clock);
      clientStats(k).stallSeconds += stall;
      mecStats(clients_[k].mec).stallSeconds += stall;
      r.clock = t;
    }
  }

  void handle(const QueuedEvent& ev) {
    const std::uint32_t k = ev.client;
    advance(k, ev.time);
    if (ev.kind == Event::Complete) complete(k, ev.time);
    next(k, ev.time);
  }

  bool sessionHasMore(const Runtime& r) const { return r.cursor.active && r.cursor.nextSegment <= r.session.lastSegment; }

  void next(std::uint32_t k, double t) {
    Runtime& r = rt_[k];
    const double buffered = clients_[k].bufferSeconds();
    if (sessionHasMore(r)) {
      const double room = sc_.client.maxBufferSeconds - segSeconds_;
      if (buffered <= room + 1e-9)
        startDownload(k, t);
      else
        schedule(k, t + (buffered - room), Event::Wake);
      return;
    }
    if (buffered > 1e-9) {
      schedule(k, t + buffered, Event::Wake);
      return;
    }
    r.session = r.sessions.next(catalog_, pop_, *zipf_, sc_.workload.abandonProbability);
    r.cursor.video = r.session.video;
    r.cursor.nextSegment = 1;
    r.cursor.active = true;
    startDownload(k, t);
  }

  std::size_t cloudLink(int q) const { return static_cast<std::size_t>(q); }
  std::size_t neighborLink(int from, int to) const {
    return topo_.mecCount() + static_cast<std::size_t>(from) * topo_.mecCount() + static_cast<std::size_t>(to);
  }

  Source route(int q, const SegmentKey& key) const {
    if (policy_ == PolicyKind::None) return {SourceKind::Cloud, -1};
    if (caches_[q].contains(key)) return {SourceKind::Local, q};
    int best = -1;
    for (int p : topo_.neighbors[q]) {
      if (!caches_[p].contains(key)) continue;
      if (best < 0 || linkActive_[neighborLink(p, q)] < linkActive_[neighborLink(best, q)]) best = p;
    }
    if (best >= 0) return {SourceKind::Neighbor, best};
    return {SourceKind::Cloud, -1};
  }

  void startDownload(std::uint32_t k, double t) {
    Runtime& r = rt_[k];
    ClientState& c = clients_[k];
    const int q = c.mec;
    const SegmentKey key{r.cursor.video, r.cursor.nextSegment, r.cursor.targetLevel};
    ++r.cursor.nextSegment;
    const Bytes size = catalog_.sizeOf(key);
    c.countRequest(key);

    Download d{key, size, route(q, key), 0, t};
    TrafficStats& cs = clientStats(k);
    TrafficStats& ms = mecStats(q);
    ++cs.requests;
    ++ms.requests;
    if (auto* pol = baseline(q)) pol->onRequest(key, size, d.source.kind == SourceKind::Local, t);

    double rate = radio_[k];
    double latency = sc_.coop.localLatencySeconds;
    switch (d.source.kind) {
      case SourceKind::Local:
        ++cs.localHits;
        ++ms.localHits;
        caches_[q].beginTransfer(key);
        break;
      case SourceKind::Neighbor: {
        ++cs.neighborFetches;
        ++ms.neighborFetches;
        cs.intermecBytes += size;
        ms.intermecBytes += size;
        caches_[d.source.mec].beginTransfer(key);
        d.link = neighborLink(d.source.mec, q);
        rate = std::min(rate, sc_.coop.mecCapacityBps / static_cast<double>(linkActive_[d.link] + 1));
        ++linkActive_[d.link];
        latency = sc_.coop.neighborLatencySeconds;
        break;
      }
      default: {
        ++cs.cloudFetches;
        ++ms.cloudFetches;
        cs.backhaulBytes += size;
        ms.backhaulBytes += size;
        d.link = cloudLink(q);
        rate = std::min(rate, sc_.coop.cloudCapacityBps / static_cast<double>(linkActive_[d.link] + 1));
        ++linkActive_[d.link];
        latency = sc_.coop.cloudLatencySeconds;
        break;
      }
    }
    const double duration = latency + 8.0 * static_cast<double>(size) / std::max(rate, 1.0);
    r.download = d;
    schedule(k, t + duration, Event::Complete);
  }

  void complete(std::uint32_t k, double t) {
    Runtime& r = rt_[k];
    ClientState& c = clients_[k];
    const Download d = *r.download;
    r.download.reset();
    const int q = c.mec;
    recordDelivery(c, d.size, t - d.start, catalog_.segmentFrames());
    clientStats(k).deliveredBytes += d.size;
    mecStats(q).deliveredBytes += d.size;

    if (d.source.kind == SourceKind::Local) {
      caches_[q].endTransfer(d.key);
      return;
    }
    --linkActive_[d.link];
    if (d.source.kind == SourceKind::Neighbor) caches_[d.source.mec].endTransfer(d.key);

    // Reactive policies keep a copy of what they just relayed, if the fill
    // fits the link budget. The bytes already crossed the link for delivery.
    ReplacementPolicy* pol = baseline(q);
    CacheState& cache = caches_[q];
    if (!pol || cache.contains(d.key)) return;
    const Source fillSource = d.source.kind == SourceKind::Neighbor ? d.source : Source{SourceKind::Cloud, -1};
    if (!budgets_[q].canCharge(fillSource, d.size)) return;
    PolicyDecision dec = pol->onMiss(cache, d.key, d.size, t);
    if (!dec.insert) return;
    budgets_[q].charge(fillSource, d.size);
    for (const auto& v : dec.evict) {
      cache.erase(v);
      pol->onEvicted(v);
      ++current_.activity[q].evicted;
    }
    cache.insert(d.key, d.size, Partition::Delta3);
    pol->onInserted(d.key, d.size, t);
  }

  ReplacementPolicy* baseline(int q) {
    return policies_.empty() ? nullptr : policies_[static_cast<std::size_t>(q)].get();
  }

  void accountFills(int q, std::span<const Fetch> fills) {
    for (const auto& f : fills) {
      if (f.source.kind == SourceKind::Cloud) {
        mecStats(q).backhaulBytes += f.size;
        current_.activity[q].fillCloudBytes += f.size;
      } else if (f.source.kind == SourceKind::Neighbor) {
        mecStats(q).intermecBytes += f.size;
        current_.activity[q].fillNeighborBytes += f.size;
      }
    }
  }

  bool isLongBoundary() const { return period_ > 1 && (period_ - 1) % sc_.periods.shortPerLong == 0; }
  std::uint32_t longPeriod() const { return (period_ - 1) / sc_.periods.shortPerLong + 1; }

  void beginPeriod(double t0) {
    const std::size_t Q = topo_.mecCount();
    current_ = PeriodRecord{};
    current_.period = period_;
    current_.longPeriod = longPeriod();
    current_.clients.assign(clients_.size(), {});
    current_.mecs.assign(Q, {});
    current_.activity.assign(Q, {});

    radio_ = radioCapacities(topo_, sc_.radio, seed_, period_);
    for (auto& b : budgets_) b.reset();
    view_ = std::make_unique<AvailabilityView>(std::span<const CacheState>(caches_), topo_.neighbors);

    // The workload follows the long-period popularity for every policy.
    if (sc_.popularityRedraw && isLongBoundary())
      pop_ = pop_.redrawn(seed_, longPeriod(), sc_.catalog.popularFraction);
    if (policy_ == PolicyKind::Proposed) {
      proposedBoundary();
    } else {
      for (std::size_t q = 0; q < policies_.size(); ++q) policies_[q]->onPeriodStart(*view_, static_cast<int>(q), t0);
    }
  }

  std::vector<ClientQueue> queuesOf(int q) const {
    std::vector<ClientQueue> out;
    for (auto k : topo_.regionClients[q]) {
      const Runtime& r = rt_[k];
      if (!r.cursor.active) continue;
      const Video& v = catalog_.video(r.cursor.video);
      ClientQueue cq{k, {}};
      for (std::uint32_t j = 0; j < sc_.workload.lookaheadSegments; ++j) {
        const std::uint32_t seg = r.cursor.nextSegment + j;
        if (seg > v.segmentCount) break;
        cq.keys.push_back({r.cursor.video, seg, r.cursor.targetLevel});
      }
      if (!cq.keys.empty()) out.push_back(std::move(cq));
    }
    return out;
  }

  void proposedBoundary() {
    const int Q = static_cast<int>(topo_.mecCount());
    if (isLongBoundary()) {
      for (int q = 0; q < Q; ++q) {
        const auto r = refreshDelta1(caches_[q], catalog_, pop_);
        current_.activity[q].delta1Transfer = r.transfer;
        current_.activity[q].evicted += r.evicted.size();
        delta1Target_[q] = delta1Target(catalog_, pop_);
      }
    }

    ProposedConfig cfg;
    cfg.omega = sc_.policy.omega;
    cfg.segmentSeconds = segSeconds_;
    cfg.maxBufferSeconds = sc_.client.maxBufferSeconds;
    cfg.weights = sc_.policy.deleteWeights();
    cfg.nodeLimit = sc_.policy.nodeLimit;

    for (int q = 0; q < Q; ++q) {
      std::vector<SegmentKey> missing;
      for (const auto& k : delta1Target_[q])
        if (!caches_[q].contains(k)) missing.push_back(k);
      accountFills(q, fetchDelta1(caches_[q], missing, catalog_, *view_, q, budgets_[q]));

      const auto queues = queuesOf(q);
      const auto utilities = requestUtilities(clients_, queues, *view_, q, catalog_, cfg);
      const auto items = aggregateUtilities(std::span<const RequestUtility>(utilities), *view_, q,
                                            [&](const SegmentKey& k) { return catalog_.sizeOf(k); });
      auto out = placeAndFetch(caches_[q], items, *view_, q, budgets_[q], pop_, cfg, opt_.fillIdleSpace);
      accountFills(q, out.fetched);
      accountFills(q, out.idleFills);
      auto& act = current_.activity[q];
      act.solverItems = out.candidates.size();
      act.solverNodes = out.solution.nodes;
      act.solverNodeLimit = out.solution.status == SolveStatus::NodeLimit;
      act.evicted += out.evicted.size();
    }
  }

  void endPeriod(double t1) {
    for (std::uint32_t k = 0; k < clients_.size(); ++k) advance(k, t1);

    if (policy_ == PolicyKind::Proposed) {
      for (std::size_t q = 0; q < caches_.size(); ++q) {
        std::vector<const ClientState*> region;
        for (auto k : topo_.regionClients[q]) region.push_back(&clients_[k]);
        updateDeletePriorities(caches_[q], region, catalog_, sc_.policy.deleteWeights());
      }
    }
    for (auto& c : clients_) c.resetRequestCounts();
    if (opt_.audit) audit();
    result_.periods.push_back(std::move(current_));
  }

  void audit() {
    auto fail = [&](int q, const std::string& what) {
      result_.violations.push_back("period " + std::to_string(period_) + " mec " + std::to_string(q) + ": " + what);
    };
    for (std::size_t q = 0; q < caches_.size(); ++q) {
      const int qi = static_cast<int>(q);
      for (const auto& v : caches_[q].checkInvariants()) fail(qi, v);
      for (const auto& c : clients_)
        if (!c.requestCounts.empty()) fail(qi, "request counts not reset");
      const TransferBudget& b = budgets_[q];
      for (int p : b.neighbors())
        if (b.neighborUsed(p) > b.neighborBudget(p)) fail(qi, "link budget to " + std::to_string(p) + " exceeded");
      if (b.cloudUsed() > b.cloudBudget()) fail(qi, "cloud budget exceeded");
      result_.auditChecks += 4 + b.neighbors().size();
    }
  }

  Scenario sc_;
  PolicyKind policy_;
  std::uint64_t seed_;
  SimOptions opt_;
  VideoCatalog catalog_;
  PopularitySet pop_;
  Topology topo_;
  std::unique_ptr<ZipfSampler> zipf_;
  double segSeconds_ = 2.0;

  std::vector<ClientState> clients_;
  std::vector<Runtime> rt_;
  std::vector<CacheState> caches_;
  std::vector<TransferBudget> budgets_;
  std::vector<std::unique_ptr<ReplacementPolicy>> policies_;
  std::vector<std::vector<SegmentKey>> delta1Target_;
  std::unique_ptr<AvailabilityView> view_;
  std::vector<double> radio_;
  std::vector<std::uint32_t> linkActive_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  std::uint32_t period_ = 0;
  PeriodRecord current_;
  RunResult result_;
};

inline RunResult runExperiment(const Scenario& sc, PolicyKind policy, Bytes totalCacheBytes, std::uint64_t seed,
                               SimOptions opt = {}) {
  Simulator sim(sc, policy, totalCacheBytes, seed, opt);
  return sim.run();
}

}  // namespace edgecache
