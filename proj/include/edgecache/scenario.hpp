#pragma once

// Scenario files: flat `key = value` lines grouped under `[section]` headers.
// `#` starts a comment. Lists are comma separated; points are `x y` pairs
// separated by `;`.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/catalog.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class PolicyKind { Proposed, Lru, Lfu, Wgdsf, Rbcc, None };

inline const std::vector<PolicyKind>& allPolicies() {
  static const std::vector<PolicyKind> all{PolicyKind::Proposed, PolicyKind::Lru,  PolicyKind::Lfu,
                                           PolicyKind::Wgdsf,    PolicyKind::Rbcc, PolicyKind::None};
  return all;
}

inline std::string toString(PolicyKind p) {
  switch (p) {
    case PolicyKind::Proposed: return "proposed";
    case PolicyKind::Lru: return "lru";
    case PolicyKind::Lfu: return "lfu";
    case PolicyKind::Wgdsf: return "wgdsf";
    case PolicyKind::Rbcc: return "rbcc";
    case PolicyKind::None: return "none";
  }
  return "?";
}

inline std::optional<PolicyKind> parsePolicy(std::string_view s) {
  for (auto p : allPolicies())
    if (toString(p) == s) return p;
  return std::nullopt;
}

struct TopologyConfig {
  std::vector<Point> mecs{{-600, 0}, {0, 0}, {600, 0}};
  std::vector<Point> enbs{{600, 342}, {600, -342}, {0, -690}, {-600, -342}, {-600, 342}, {0, 690}};
  std::uint32_t clients = 378;
  double areaHalfWidth = 900.0;
  std::vector<std::pair<int, int>> adjacency;  // empty = full mesh
};

struct RadioConfig {
  double bandwidthHz = 20e6;
  double pathlossDb = 20.0;
  double referenceSnrDb = 116.0;  // at 1 m, before the fixed pathloss term
  double pathlossExponent = 3.0;
  double shadowingDb = 4.0;
  double maxSpectralEfficiency = 6.0;
};

struct ClientConfig {
  double initialBufferSeconds = 0.0;
  double maxBufferSeconds = 6.0;
  double capacityEwma = 0.3;
  double targetHeadroom = 0.7;  // target level: highest rate <= headroom * nominal share
};

struct CoopConfig {
  double cloudCapacityBps = 500e6;
  double mecCapacityBps = 200e6;
  double periodSeconds = 100.0;  // TD
  double cloudLatencySeconds = 0.2;
  double neighborLatencySeconds = 0.02;
  double localLatencySeconds = 0.0;
};

struct PeriodConfig {
  std::uint32_t longPeriods = 10;    // Theta
  std::uint32_t shortPerLong = 10;   // short periods per long period
};

struct PolicyParams {
  PolicyKind policy = PolicyKind::Proposed;
  double alpha = 0.5;
  double beta = 0.6;  // listed with the experimental constants; no rule uses it
  double zeta = 0.8;
  double lambda = 0.8;
  double omega = 2.0;
  double wgdsfTimeWeight = 1.0;
  double wgdsfTypeWeight = 1.0;
  double wgdsfHalfLifePeriods = 5.0;
  double rbccDiscount = 0.5;
  std::size_t nodeLimit = 1'000'000;

  DeleteWeights deleteWeights() const { return {zeta, alpha, lambda}; }
};

struct Scenario {
  TopologyConfig topology;
  RadioConfig radio;
  CatalogConfig catalog;
  WorkloadConfig workload;
  ClientConfig client;
  CoopConfig coop;
  PeriodConfig periods;
  PolicyParams policy;
  Bytes totalCacheBytes = 2'400'000'000ULL;
  std::vector<Bytes> perMecCacheBytes;  // optional override of demand-based sizing
  std::vector<Bytes> sweepCacheBytes;   // total sizes for sweeps; empty = {totalCacheBytes}
  bool popularityRedraw = false;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  std::uint32_t totalShortPeriods() const { return periods.longPeriods * periods.shortPerLong; }
  std::vector<Bytes> sweepSizes() const {
    return sweepCacheBytes.empty() ? std::vector<Bytes>{totalCacheBytes} : sweepCacheBytes;
  }
};

/// Collected validation problems, each prefixed with the offending field.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> problems)
      : Error("invalid-scenario", join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& p : v) s += (s.empty() ? "" : "; ") + p;
    return s;
  }
  std::vector<std::string> problems_;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && std::isfinite(out);
}

/// Accepts plain integers, scientific notation and K/M/G (decimal) suffixes.
inline bool parseBytes(const std::string& s, Bytes& out) {
  if (s.empty()) return false;
  double mult = 1.0;
  std::string body = s;
  const char last = static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
  if (last == 'K' || last == 'M' || last == 'G') {
    mult = last == 'K' ? 1e3 : last == 'M' ? 1e6 : 1e9;
    body = s.substr(0, s.size() - 1);
  }
  double v = 0.0;
  if (!parseDouble(body, v) || v < 0.0) return false;
  out = static_cast<Bytes>(std::llround(v * mult));
  return true;
}

}  // namespace detail

/// Parses and validates scenario text. Every key has a default; unknown keys
/// and bad values are reported together, each naming its field.
inline Scenario parseScenario(std::string_view text) {
  Scenario sc;
  std::vector<std::string> errors;
  std::map<std::string, std::function<void(const std::string&)>> handlers;

  auto number = [&](const std::string& key, double& dst, bool positive, bool allowZero = false) {
    handlers[key] = [&errors, key, positive, allowZero, out = &dst](const std::string& v) {
      double d;
      if (!detail::parseDouble(v, d)) return errors.push_back(key + ": not a number");
      if (positive && (d < 0.0 || (d == 0.0 && !allowZero))) return errors.push_back(key + ": must be positive");
      *out = d;
    };
  };
  auto integer = [&](const std::string& key, auto& dst, std::uint64_t minimum) {
    handlers[key] = [&errors, key, minimum, out = &dst](const std::string& v) {
      double d;
      if (!detail::parseDouble(v, d) || d != std::floor(d)) return errors.push_back(key + ": not an integer");
      if (d < static_cast<double>(minimum)) return errors.push_back(key + ": must be >= " + std::to_string(minimum));
      *out = static_cast<std::remove_reference_t<decltype(*out)>>(d);
    };
  };
  auto boolean = [&](const std::string& key, bool& dst) {
    handlers[key] = [&errors, key, out = &dst](const std::string& v) {
      if (v == "true" || v == "1" || v == "yes") *out = true;
      else if (v == "false" || v == "0" || v == "no") *out = false;
      else errors.push_back(key + ": expected true or false");
    };
  };
  auto points = [&](const std::string& key, std::vector<Point>& dst) {
    handlers[key] = [&errors, key, out = &dst](const std::string& v) {
      out->clear();
      for (const auto& p : detail::split(v, ';')) {
        std::istringstream is(p);
        Point pt;
        std::string rest;
        if (!(is >> pt.x >> pt.y) || (is >> rest)) return errors.push_back(key + ": expected 'x y; x y; ...'");
        out->push_back(pt);
      }
    };
  };

  // [topology]
  points("mec_positions", sc.topology.mecs);
  points("enb_positions", sc.topology.enbs);
  integer("clients", sc.topology.clients, 1);
  number("area_half_width", sc.topology.areaHalfWidth, true);
  handlers["adjacency"] = [&](const std::string& v) {
    sc.topology.adjacency.clear();
    if (v == "full") return;
    for (const auto& e : detail::split(v, ',')) {
      auto ends = detail::split(e, '-');
      double a, b;
      if (ends.size() != 2 || !detail::parseDouble(ends[0], a) || !detail::parseDouble(ends[1], b))
        return errors.push_back("adjacency: expected 'full' or 'p-q, ...'");
      sc.topology.adjacency.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  };
  // [radio]
  number("bandwidth_hz", sc.radio.bandwidthHz, true);
  number("pathloss_db", sc.radio.pathlossDb, false);
  number("reference_snr_db", sc.radio.referenceSnrDb, false);
  number("pathloss_exponent", sc.radio.pathlossExponent, true);
  number("shadowing_db", sc.radio.shadowingDb, true, true);
  number("max_spectral_efficiency", sc.radio.maxSpectralEfficiency, true);
  // [catalog]
  integer("videos", sc.catalog.videos, 1);
  integer("segments_min", sc.catalog.segmentsMin, 1);
  integer("segments_max", sc.catalog.segmentsMax, 1);
  handlers["rate_ladder_bps"] = [&](const std::string& v) {
    sc.catalog.rateLadderBps.clear();
    for (const auto& r : detail::split(v, ',')) {
      double d;
      if (!detail::parseDouble(r, d) || d <= 0.0) return errors.push_back("rate_ladder_bps: rates must be positive numbers");
      sc.catalog.rateLadderBps.push_back(d);
    }
  };
  number("size_jitter", sc.catalog.sizeJitter, true, true);
  integer("segment_frames", sc.catalog.segmentFrames, 1);
  number("frame_rate", sc.catalog.frameRate, true);
  number("zipf_theta", sc.catalog.zipfTheta, true);
  number("popular_fraction", sc.catalog.popularFraction, true);
  boolean("popularity_redraw", sc.popularityRedraw);
  // [workload]
  number("abandon_probability", sc.workload.abandonProbability, true, true);
  integer("lookahead_segments", sc.workload.lookaheadSegments, 1);
  integer("history_sessions", sc.workload.historySessions, 1);
  // [client]
  number("initial_buffer_s", sc.client.initialBufferSeconds, true, true);
  number("max_buffer_s", sc.client.maxBufferSeconds, true);
  number("capacity_ewma", sc.client.capacityEwma, true);
  number("target_headroom", sc.client.targetHeadroom, true);
  // [cache]
  handlers["total_bytes"] = [&](const std::string& v) {
    if (!detail::parseBytes(v, sc.totalCacheBytes)) errors.push_back("total_bytes: expected a byte count");
  };
  handlers["per_mec_bytes"] = [&](const std::string& v) {
    sc.perMecCacheBytes.clear();
    if (v.empty()) return;
    for (const auto& s : detail::split(v, ',')) {
      Bytes b;
      if (!detail::parseBytes(s, b)) return errors.push_back("per_mec_bytes: expected byte counts");
      sc.perMecCacheBytes.push_back(b);
    }
  };
  handlers["sweep_bytes"] = [&](const std::string& v) {
    sc.sweepCacheBytes.clear();
    if (v.empty()) return;
    for (const auto& s : detail::split(v, ',')) {
      Bytes b;
      if (!detail::parseBytes(s, b)) return errors.push_back("sweep_bytes: expected byte counts");
      sc.sweepCacheBytes.push_back(b);
    }
  };
  // [coop]
  number("cloud_capacity_bps", sc.coop.cloudCapacityBps, true);
  number("mec_capacity_bps", sc.coop.mecCapacityBps, true);
  number("period_s", sc.coop.periodSeconds, true);
  number("cloud_latency_s", sc.coop.cloudLatencySeconds, true, true);
  number("neighbor_latency_s", sc.coop.neighborLatencySeconds, true, true);
  number("local_latency_s", sc.coop.localLatencySeconds, true, true);
  // [periods]
  integer("long_periods", sc.periods.longPeriods, 1);
  integer("short_per_long", sc.periods.shortPerLong, 1);
  // [policy]
  handlers["name"] = [&](const std::string& v) {
    if (auto p = parsePolicy(v)) sc.policy.policy = *p;
    else errors.push_back("name: unknown policy '" + v + "'");
  };
  number("alpha", sc.policy.alpha, true);
  number("beta", sc.policy.beta, true);
  number("zeta", sc.policy.zeta, true);
  number("lambda", sc.policy.lambda, true, true);
  number("omega", sc.policy.omega, true);
  number("wgdsf_time_weight", sc.policy.wgdsfTimeWeight, true);
  number("wgdsf_type_weight", sc.policy.wgdsfTypeWeight, true);
  number("wgdsf_half_life_periods", sc.policy.wgdsfHalfLifePeriods, true, true);
  number("rbcc_discount", sc.policy.rbccDiscount, true);
  integer("node_limit", sc.policy.nodeLimit, 1);
  // [run]
  handlers["seeds"] = [&](const std::string& v) {
    sc.seeds.clear();
    if (v.empty()) return;
    for (const auto& s : detail::split(v, ',')) {
      double d;
      if (!detail::parseDouble(s, d) || d < 0 || d != std::floor(d)) return errors.push_back("seeds: expected integers");
      sc.seeds.push_back(static_cast<std::uint64_t>(d));
    }
  };

  static const std::vector<std::string> sections{"topology", "radio", "catalog", "workload", "client",
                                                 "cache",    "coop",  "periods", "policy",   "run"};
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::string line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const std::string name = detail::trim(line.substr(1, line.find(']') - 1));
      if (line.back() != ']' || std::find(sections.begin(), sections.end(), name) == sections.end())
        errors.push_back("line " + std::to_string(lineNo) + ": unknown section '" + line + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineNo) + ": expected 'key = value'");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto h = handlers.find(key);
    if (h == handlers.end()) {
      errors.push_back(key + ": unknown key");
      continue;
    }
    h->second(value);
  }

  // Cross-field checks.
  if (sc.seeds.empty()) errors.push_back("seeds: empty");
  if (sc.topology.mecs.empty()) errors.push_back("mec_positions: empty");
  if (sc.topology.enbs.empty()) errors.push_back("enb_positions: empty");
  const int q = static_cast<int>(sc.topology.mecs.size());
  for (auto [a, b] : sc.topology.adjacency)
    if (a < 0 || b < 0 || a >= q || b >= q || a == b)
      errors.push_back("adjacency: MEC pair " + std::to_string(a) + "-" + std::to_string(b) + " is not valid");
  if (!sc.perMecCacheBytes.empty() && sc.perMecCacheBytes.size() != sc.topology.mecs.size())
    errors.push_back("per_mec_bytes: need one value per MEC");
  if (sc.catalog.segmentsMax < sc.catalog.segmentsMin) errors.push_back("segments_max: smaller than segments_min");
  if (sc.catalog.rateLadderBps.empty()) errors.push_back("rate_ladder_bps: empty");
  for (std::size_t l = 1; l < sc.catalog.rateLadderBps.size(); ++l)
    if (!(sc.catalog.rateLadderBps[l] > sc.catalog.rateLadderBps[l - 1]))
      errors.push_back("rate_ladder_bps: must be strictly increasing");
  if (sc.catalog.sizeJitter >= 1.0) errors.push_back("size_jitter: must be < 1");
  if (sc.catalog.popularFraction > 1.0) errors.push_back("popular_fraction: must be <= 1");
  if (sc.workload.abandonProbability > 1.0) errors.push_back("abandon_probability: must be <= 1");
  if (sc.policy.lambda > 1.0) errors.push_back("lambda: must be <= 1");
  if (sc.client.capacityEwma > 1.0) errors.push_back("capacity_ewma: must be <= 1");
  const double segSeconds = sc.catalog.segmentFrames / sc.catalog.frameRate;
  if (sc.client.maxBufferSeconds < segSeconds) errors.push_back("max_buffer_s: must hold at least one segment");

  if (!errors.empty()) throw ScenarioError(std::move(errors));
  sc.catalog.seed = sc.seeds.front();
  return sc;
}

inline Scenario loadScenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io", "cannot read scenario '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parseScenario(ss.str());
}

}  // namespace edgecache
