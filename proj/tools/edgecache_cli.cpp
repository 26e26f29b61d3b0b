// Experiment runner.
//
//   edgecache run <scenario> [--policy P]... [--sizes S,...] [--seeds N,...] [--jobs N] [--out DIR]
//   edgecache validate <scenario>
//   edgecache solve <problem-file> [--oracle]
//
// EDGECACHE_LOG sets the log level (trace, debug, info, warn, error, off).

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "edgecache/edgecache.hpp"

namespace ec = edgecache;

namespace {

void configureLogging() {
  const char* env = std::getenv("EDGECACHE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

int validate(const std::string& path) {
  try {
    const ec::Scenario sc = ec::loadScenario(path);
    std::cout << "valid: " << sc.topology.clients << " clients, " << sc.topology.mecs.size() << " MECs, "
              << sc.topology.enbs.size() << " eNodeBs, " << sc.catalog.videos << " videos, "
              << sc.catalog.rateLadderBps.size() << " levels\n"
              << "periods: " << sc.periods.longPeriods << " long x " << sc.periods.shortPerLong << " short of "
              << sc.coop.periodSeconds << " s\n"
              << "links: cloud " << sc.coop.cloudCapacityBps << " bps, inter-MEC " << sc.coop.mecCapacityBps
              << " bps\n"
              << "policy constants: alpha " << sc.policy.alpha << ", zeta " << sc.policy.zeta << ", lambda "
              << sc.policy.lambda << ", omega " << sc.policy.omega << "\n";
    return 0;
  } catch (const ec::ScenarioError& e) {
    for (const auto& p : e.problems()) std::cerr << p << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}

int solve(const std::string& path, bool oracle) {
  try {
    std::ifstream in(path);
    if (!in) throw ec::Error("io", "cannot read '" + path + "'");
    const ec::PlacementProblem prob = ec::readProblem(in);
    const auto sol = ec::branchAndBound(prob);
    std::cout << "status " << ec::toString(sol.status) << "\nobjective " << sol.objective << "\nnodes " << sol.nodes
              << "\nselected";
    for (std::size_t j = 0; j < sol.selected.size(); ++j)
      if (sol.selected[j]) std::cout << ' ' << j;
    std::cout << '\n';
    if (oracle) {
      const auto ref = ec::bruteForceOracle(prob);
      std::cout << "oracle " << ref.objective << '\n';
      if (ref.objective != sol.objective) {
        spdlog::error("branch-and-bound objective differs from exhaustive search");
        return 1;
      }
    }
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

int run(const std::string& path, const std::vector<std::string>& policyNames, std::vector<std::string> sizeArgs,
        std::vector<std::uint64_t> seeds, unsigned jobs, const std::string& out) {
  ec::Scenario sc;
  try {
    sc = ec::loadScenario(path);
  } catch (const ec::ScenarioError& e) {
    for (const auto& p : e.problems()) spdlog::error("{}", p);
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }

  std::vector<ec::PolicyKind> policies;
  for (const auto& n : policyNames) {
    auto p = ec::parsePolicy(n);
    if (!p) {
      spdlog::error("--policy: unknown policy '{}'", n);
      return 2;
    }
    policies.push_back(*p);
  }
  if (policies.empty()) policies = ec::allPolicies();

  std::vector<ec::Bytes> sizes;
  for (const auto& s : sizeArgs) {
    ec::Bytes b;
    if (!ec::detail::parseBytes(s, b)) {
      spdlog::error("--sizes: '{}' is not a byte count", s);
      return 2;
    }
    sizes.push_back(b);
  }
  if (sizes.empty()) sizes = sc.sweepSizes();
  if (seeds.empty()) seeds = sc.seeds;

  const auto cells = policies.size() * sizes.size() * seeds.size();
  spdlog::info("running {} cells on {} threads into {}", cells, jobs, out);
  const auto started = std::chrono::steady_clock::now();
  const auto report = ec::runSweep(sc, policies, sizes, seeds, jobs, out, [](const ec::CellOutcome& o) {
    if (o.ok)
      spdlog::info("{}: throughput {} bps, hit ratio {}, frozen {} s", o.cell.name(), o.summary.meanThroughputBps,
                   ec::fixed6(o.summary.hitRatio), ec::fixed6(o.summary.meanFrozenSeconds));
    else
      spdlog::error("{}: {}", o.cell.name(), o.message);
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  spdlog::info("done in {:.1f} s; summary at {}/summary.csv", secs, out);
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  configureLogging();
  CLI::App app{"Cooperative multi-MEC video segment caching simulator"};
  app.require_subcommand(1);

  std::string scenarioPath;
  std::vector<std::string> policies;
  std::vector<std::string> sizes;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out = "out";
  auto* runCmd = app.add_subcommand("run", "Run a policy x cache-size x seed sweep");
  runCmd->add_option("scenario", scenarioPath, "Scenario file")->required()->check(CLI::ExistingFile);
  runCmd->add_option("--policy", policies, "Policies (proposed, lru, lfu, wgdsf, rbcc, none); default all")
      ->delimiter(',');
  runCmd->add_option("--sizes", sizes, "Total cache sizes in bytes (K/M/G suffixes allowed)")->delimiter(',');
  runCmd->add_option("--seeds", seeds, "Seeds; default from the scenario")->delimiter(',');
  runCmd->add_option("--jobs", jobs, "Parallel cells")->check(CLI::PositiveNumber);
  runCmd->add_option("--out", out, "Output directory");

  std::string validatePath;
  auto* validateCmd = app.add_subcommand("validate", "Check a scenario file");
  validateCmd->add_option("scenario", validatePath, "Scenario file")->required();

  std::string problemPath;
  bool oracle = false;
  auto* solveCmd = app.add_subcommand("solve", "Solve a dumped placement problem");
  solveCmd->add_option("problem", problemPath, "Problem file")->required();
  solveCmd->add_flag("--oracle", oracle, "Cross-check against exhaustive search (<= 22 items)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*runCmd) return run(scenarioPath, policies, sizes, seeds, jobs, out);
  if (*validateCmd) return validate(validatePath);
  if (*solveCmd) return solve(problemPath, oracle);
  return 2;
}
