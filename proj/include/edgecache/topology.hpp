#pragma once

// Placement of MEC servers, eNodeBs and clients, plus the downlink capacity
// model: log-distance pathloss, lognormal shadowing, Shannon rate over the
// cell bandwidth with a spectral-efficiency ceiling, shared equally among the
// clients attached to an eNodeB (Round-Robin time share).

#include <cmath>
#include <cstdint>
#include <vector>

#include "edgecache/rng.hpp"
#include "edgecache/scenario.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct Topology {
  std::vector<Point> mecs;
  std::vector<Point> enbs;
  std::vector<int> enbMec;           // serving MEC of each eNodeB
  std::vector<Point> clients;
  std::vector<int> clientEnb;
  std::vector<int> clientMec;        // region of each client
  std::vector<std::vector<int>> neighbors;  // ascending ids
  std::vector<std::vector<std::uint32_t>> regionClients;
  std::vector<std::uint32_t> enbLoad;  // attached clients per eNodeB

  std::size_t mecCount() const { return mecs.size(); }
  std::size_t clientCount() const { return clients.size(); }
};

namespace detail {
template <typename Range>
int nearest(const Range& sites, Point p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(sites.size()); ++i)
    if (distance(sites[i], p) < distance(sites[best], p)) best = i;
  return best;
}
}  // namespace detail

/// Clients are placed uniformly in the square [-w, w]^2 and attach to the
/// nearest eNodeB; each eNodeB belongs to its nearest MEC.
inline Topology buildTopology(const TopologyConfig& cfg, std::uint64_t seed) {
  Topology t;
  t.mecs = cfg.mecs;
  t.enbs = cfg.enbs;
  for (const auto& e : t.enbs) t.enbMec.push_back(detail::nearest(t.mecs, e));

  Rng rng(deriveSeed(seed, {stream::kTopology}));
  t.enbLoad.assign(t.enbs.size(), 0);
  t.regionClients.resize(t.mecs.size());
  for (std::uint32_t k = 0; k < cfg.clients; ++k) {
    Point p{uniform(rng, -cfg.areaHalfWidth, cfg.areaHalfWidth), uniform(rng, -cfg.areaHalfWidth, cfg.areaHalfWidth)};
    const int h = detail::nearest(t.enbs, p);
    t.clients.push_back(p);
    t.clientEnb.push_back(h);
    t.clientMec.push_back(t.enbMec[h]);
    ++t.enbLoad[h];
    t.regionClients[t.enbMec[h]].push_back(k);
  }

  const int q = static_cast<int>(t.mecs.size());
  t.neighbors.assign(q, {});
  if (cfg.adjacency.empty()) {
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b)
        if (a != b) t.neighbors[a].push_back(b);
  } else {
    std::vector<std::vector<bool>> adj(q, std::vector<bool>(q, false));
    for (auto [a, b] : cfg.adjacency) adj[a][b] = adj[b][a] = true;
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b)
        if (adj[a][b]) t.neighbors[a].push_back(b);
  }
  return t;
}

/// Received SNR in dB at distance `meters` before shadowing.
inline double meanSnrDb(const RadioConfig& r, double meters) {
  return r.referenceSnrDb - r.pathlossDb - 10.0 * r.pathlossExponent * std::log10(std::max(meters, 1.0));
}

/// Full-cell rate at a given SNR: Shannon with a spectral-efficiency cap.
inline double cellRateBps(const RadioConfig& r, double snrDb) {
  const double se = std::min(std::log2(1.0 + std::pow(10.0, snrDb / 10.0)), r.maxSpectralEfficiency);
  return r.bandwidthHz * se;
}

/// Round-Robin share of a cell among its active clients.
inline double radioShare(double cellRate, std::uint32_t activeClients) {
  return activeClients == 0 ? 0.0 : cellRate / static_cast<double>(activeClients);
}

/// Per-client downlink capacity for one short period. Shadowing is drawn from
/// a stream keyed by (seed, period, client), so it does not depend on policy.
inline std::vector<double> radioCapacities(const Topology& t, const RadioConfig& r, std::uint64_t seed,
                                           std::uint64_t period) {
  std::vector<double> out(t.clientCount());
  for (std::uint32_t k = 0; k < t.clientCount(); ++k) {
    Rng rng(deriveSeed(seed, {stream::kFading, period, k}));
    const int h = t.clientEnb[k];
    const double snr = meanSnrDb(r, distance(t.clients[k], t.enbs[h])) + r.shadowingDb * standardNormal(rng);
    out[k] = radioShare(cellRateBps(r, snr), t.enbLoad[h]);
  }
  return out;
}

/// Capacity without shadowing; used to pick each client's target level.
inline double nominalCapacity(const Topology& t, const RadioConfig& r, std::uint32_t k) {
  const int h = t.clientEnb[k];
  return radioShare(cellRateBps(r, meanSnrDb(r, distance(t.clients[k], t.enbs[h]))), t.enbLoad[h]);
}

}  // namespace edgecache
