// Runs one short simulation of the proposed policy and prints its summary.

#include <iostream>

#include "edgecache/edgecache.hpp"

int main(int argc, char** argv) {
  using namespace edgecache;
  Scenario sc = argc > 1 ? loadScenario(argv[1]) : Scenario{};
  if (argc <= 1) {
    sc.topology.clients = 30;
    sc.periods = {2, 3};
  }
  const RunResult r = runExperiment(sc, PolicyKind::Proposed, sc.totalCacheBytes, sc.seeds.front());
  std::cout << kSummaryHeader << '\n' << summaryRow(summarize(r)) << '\n';
  std::cout << r.violations.size() << " audit violations over " << r.auditChecks << " checks\n";
}
