#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "edgecache/sweep.hpp"
#include "tiny_scenario.hpp"

using namespace edgecache;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> readCsv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::getline(in, line);
  if (header) *header = line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::vector<PolicyKind> kCompared{PolicyKind::Proposed, PolicyKind::Lru, PolicyKind::Lfu, PolicyKind::Wgdsf,
                                        PolicyKind::Rbcc};

class Sweep : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("edgecache-sweep-" + std::to_string(::getpid()));
    fs::remove_all(root_);
    const auto sc = tinyScenario();
    const auto sizes = sc.sweepSizes();
    report_ = runSweep(sc, kCompared, sizes, sc.seeds, 2, root_ / "a");
    runSweep(sc, kCompared, sizes, sc.seeds, 1, root_ / "b");
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static fs::path root_;
  static SweepReport report_;
};

fs::path Sweep::root_;
SweepReport Sweep::report_;

}  // namespace

TEST_F(Sweep, OneRowPerCell) {
  ASSERT_TRUE(report_.ok());
  std::string header;
  const auto rows = readCsv(root_ / "a" / "summary.csv", &header);
  EXPECT_EQ(header, kSummaryHeader);
  EXPECT_EQ(rows.size(), 60u);
  for (const auto& r : rows) EXPECT_EQ(r.size(), 8u);
}

TEST_F(Sweep, RerunIsByteIdentical) {
  for (const auto& entry : fs::recursive_directory_iterator(root_ / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root_ / "a");
    ASSERT_TRUE(fs::exists(root_ / "b" / rel)) << rel;
    EXPECT_EQ(slurp(entry.path()), slurp(root_ / "b" / rel)) << rel;
  }
}

TEST_F(Sweep, SummaryRecomputesFromPeriodRows) {
  for (const auto& row : readCsv(root_ / "a" / "summary.csv")) {
    const auto policy = *parsePolicy(row[0]);
    const SweepCell cell{policy, std::stoull(row[1]), std::stoull(row[2])};
    std::string header;
    const auto periods = readCsv(root_ / "a" / "cells" / cell.name() / "periods.csv", &header);
    ASSERT_EQ(header, kPeriodHeader);
    double delivered = 0, stall = 0, requests = 0, hits = 0, backhaul = 0, intermec = 0;
    std::map<std::string, int> clients;
    std::set<std::string> periodIds;
    for (const auto& p : periods) {
      periodIds.insert(p[0]);
      if (p[2] == "client") {
        clients[p[3]] = 1;
        delivered += std::stod(p[5]);
        stall += std::stod(p[7]);
        requests += std::stod(p[8]);
        hits += std::stod(p[9]);
      } else {
        ASSERT_EQ(p[2], "mec");
        backhaul += std::stod(p[12]);
        intermec += std::stod(p[13]);
      }
    }
    const double seconds = 30.0 * static_cast<double>(periodIds.size());
    const double n = static_cast<double>(clients.size());
    EXPECT_NEAR(std::stod(row[3]), 8.0 * delivered / (n * seconds), 0.5) << cell.name();
    EXPECT_NEAR(std::stod(row[4]), hits / requests, 1e-6);
    EXPECT_NEAR(std::stod(row[5]), stall / n, 1e-5 * static_cast<double>(periods.size()));
    EXPECT_EQ(std::stod(row[6]), backhaul);
    EXPECT_EQ(std::stod(row[7]), intermec);
  }
}

TEST_F(Sweep, ManifestMarksEveryCell) {
  const auto rows = readCsv(root_ / "a" / "manifest.csv");
  ASSERT_EQ(rows.size(), 60u);
  for (const auto& r : rows) EXPECT_EQ(r[1], "ok") << r[0];
}

TEST(SweepNone, NoCacheRowHasZeroHits) {
  const auto dir = fs::temp_directory_path() / ("edgecache-none-" + std::to_string(::getpid()));
  const auto sc = tinyScenario();
  const std::vector<PolicyKind> none{PolicyKind::None};
  const std::vector<Bytes> size{24'000'000};
  const std::vector<std::uint64_t> seed{1};
  const auto report = runSweep(sc, none, size, seed, 1, dir);
  ASSERT_TRUE(report.ok());
  const auto rows = readCsv(dir / "summary.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0][0], "none");
  EXPECT_EQ(rows[0][4], "0.000000");
  fs::remove_all(dir);
}

TEST(SweepGrid, PolicyMajorOrder) {
  const std::vector<PolicyKind> p{PolicyKind::Lru, PolicyKind::Lfu};
  const std::vector<Bytes> s{1, 2};
  const std::vector<std::uint64_t> seeds{7};
  const auto g = sweepGrid(p, s, seeds);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[1].name(), "lru-2-s7");
  EXPECT_EQ(g[2].name(), "lfu-1-s7");
}
