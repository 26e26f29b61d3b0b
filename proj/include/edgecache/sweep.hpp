#pragma once

// Policy x cache-size x seed sweeps, CSV output and summaries.
//
// Per-period CSV (one per cell), one row per client and per MEC per period:
//   period,long_period,scope,id,mec,delivered_bytes,throughput_bps,stall_s,
//   requests,local_hits,neighbor_fetches,cloud_fetches,backhaul_bytes,intermec_bytes
// MEC rows add the region's cache-fill traffic to backhaul/intermec bytes.
//
// Summary CSV:
//   policy,total_cache_bytes,seed,mean_throughput_bps,hit_ratio,mean_frozen_s,
//   backhaul_bytes,intermec_bytes

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "edgecache/scenario.hpp"
#include "edgecache/sim.hpp"

namespace edgecache {

inline constexpr const char* kPeriodHeader =
    "period,long_period,scope,id,mec,delivered_bytes,throughput_bps,stall_s,requests,local_hits,"
    "neighbor_fetches,cloud_fetches,backhaul_bytes,intermec_bytes";
inline constexpr const char* kSummaryHeader =
    "policy,total_cache_bytes,seed,mean_throughput_bps,hit_ratio,mean_frozen_s,backhaul_bytes,intermec_bytes";

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Summary {
  PolicyKind policy = PolicyKind::Proposed;
  Bytes totalCacheBytes = 0;
  std::uint64_t seed = 0;
  std::int64_t meanThroughputBps = 0;  // delivered bits / (clients * simulated seconds)
  double hitRatio = 0.0;
  double meanFrozenSeconds = 0.0;  // stall seconds per client
  Bytes backhaulBytes = 0;
  Bytes intermecBytes = 0;
};

inline Summary summarize(const RunResult& r) {
  Summary s;
  s.policy = r.policy;
  s.totalCacheBytes = r.totalCacheBytes;
  s.seed = r.seed;
  Bytes delivered = 0;
  std::uint64_t requests = 0, hits = 0;
  double stall = 0.0;
  std::size_t clients = r.clientMec.size();
  for (const auto& p : r.periods) {
    for (const auto& c : p.clients) {
      delivered += c.deliveredBytes;
      requests += c.requests;
      hits += c.localHits;
      stall += c.stallSeconds;
    }
    for (const auto& m : p.mecs) {
      s.backhaulBytes += m.backhaulBytes;
      s.intermecBytes += m.intermecBytes;
    }
  }
  const double seconds = r.periodSeconds * static_cast<double>(r.periods.size());
  if (clients > 0 && seconds > 0.0)
    s.meanThroughputBps = std::llround(8.0 * static_cast<double>(delivered) / (static_cast<double>(clients) * seconds));
  s.hitRatio = requests ? static_cast<double>(hits) / static_cast<double>(requests) : 0.0;
  s.meanFrozenSeconds = clients ? stall / static_cast<double>(clients) : 0.0;
  return s;
}

inline std::string summaryRow(const Summary& s) {
  std::ostringstream os;
  os << toString(s.policy) << ',' << s.totalCacheBytes << ',' << s.seed << ',' << s.meanThroughputBps << ','
     << fixed6(s.hitRatio) << ',' << fixed6(s.meanFrozenSeconds) << ',' << s.backhaulBytes << ',' << s.intermecBytes;
  return os.str();
}

inline void writePeriodCsv(std::ostream& os, const RunResult& r) {
  os << kPeriodHeader << '\n';
  auto row = [&](const PeriodRecord& p, const char* scope, std::size_t id, int mec, const TrafficStats& t) {
    os << p.period << ',' << p.longPeriod << ',' << scope << ',' << id << ',' << mec << ',' << t.deliveredBytes << ','
       << std::llround(8.0 * static_cast<double>(t.deliveredBytes) / r.periodSeconds) << ','
       << fixed6(t.stallSeconds) << ',' << t.requests << ',' << t.localHits << ',' << t.neighborFetches << ','
       << t.cloudFetches << ',' << t.backhaulBytes << ',' << t.intermecBytes << '\n';
  };
  for (const auto& p : r.periods) {
    for (std::size_t k = 0; k < p.clients.size(); ++k) row(p, "client", k, r.clientMec[k], p.clients[k]);
    for (std::size_t q = 0; q < p.mecs.size(); ++q) row(p, "mec", q, static_cast<int>(q), p.mecs[q]);
  }
}

struct SweepCell {
  PolicyKind policy = PolicyKind::Proposed;
  Bytes totalCacheBytes = 0;
  std::uint64_t seed = 0;

  std::string name() const {
    return toString(policy) + "-" + std::to_string(totalCacheBytes) + "-s" + std::to_string(seed);
  }
};

struct CellOutcome {
  SweepCell cell;
  bool ok = false;
  std::string message;
  Summary summary;
  std::size_t violations = 0;
};

struct SweepReport {
  std::vector<CellOutcome> cells;  // grid order
  bool ok() const {
    for (const auto& c : cells)
      if (!c.ok) return false;
    return true;
  }
};

inline std::vector<SweepCell> sweepGrid(std::span<const PolicyKind> policies, std::span<const Bytes> sizes,
                                        std::span<const std::uint64_t> seeds) {
  std::vector<SweepCell> grid;
  for (auto p : policies)
    for (auto s : sizes)
      for (auto seed : seeds) grid.push_back({p, s, seed});
  return grid;
}

/// Runs every cell on up to `jobs` threads. Each cell writes
/// `<out>/cells/<name>/{periods,summary}.csv`; afterwards `<out>/summary.csv`
/// and `<out>/manifest.csv` are written in grid order. `onCell` (optional) is
/// called under a lock as cells finish.
inline SweepReport runSweep(const Scenario& sc, std::span<const PolicyKind> policies, std::span<const Bytes> sizes,
                            std::span<const std::uint64_t> seeds, unsigned jobs, const std::filesystem::path& out,
                            std::function<void(const CellOutcome&)> onCell = {}) {
  namespace fs = std::filesystem;
  const auto grid = sweepGrid(policies, sizes, seeds);
  SweepReport report;
  report.cells.resize(grid.size());
  fs::create_directories(out / "cells");

  std::atomic<std::size_t> next{0};
  std::mutex lock;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      CellOutcome o;
      o.cell = grid[i];
      try {
        const RunResult r = runExperiment(sc, o.cell.policy, o.cell.totalCacheBytes, o.cell.seed);
        o.summary = summarize(r);
        o.violations = r.violations.size();
        const fs::path dir = out / "cells" / o.cell.name();
        fs::create_directories(dir);
        std::ofstream periods(dir / "periods.csv");
        writePeriodCsv(periods, r);
        std::ofstream summary(dir / "summary.csv");
        summary << kSummaryHeader << '\n' << summaryRow(o.summary) << '\n';
        if (!periods || !summary) throw Error("io", "cannot write " + dir.string());
        o.ok = o.violations == 0;
        o.message = o.ok ? "ok" : r.violations.front();
      } catch (const std::exception& e) {
        o.ok = false;
        o.message = e.what();
      }
      std::lock_guard g(lock);
      report.cells[i] = o;
      if (onCell) onCell(o);
    }
  };
  std::vector<std::jthread> pool;
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  pool.clear();

  std::ofstream summary(out / "summary.csv");
  summary << kSummaryHeader << '\n';
  std::ofstream manifest(out / "manifest.csv");
  manifest << "cell,status,violations,message\n";
  for (const auto& c : report.cells) {
    if (c.ok) summary << summaryRow(c.summary) << '\n';
    std::string msg = c.message;
    for (auto& ch : msg)
      if (ch == ',' || ch == '\n') ch = ';';
    manifest << c.cell.name() << ',' << (c.ok ? "ok" : "failed") << ',' << c.violations << ',' << msg << '\n';
  }
  return report;
}

}  // namespace edgecache
