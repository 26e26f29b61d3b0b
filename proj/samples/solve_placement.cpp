// Builds a small placement problem by hand and solves it exactly.

#include <iostream>

#include "edgecache/solver.hpp"

int main() {
  using namespace edgecache;
  PlacementProblem prob;
  prob.capacity = 7;                 // free bytes in the shared cache area
  prob.neighborBudgets = {100, 100};  // per-link fill budgets for this period
  prob.cloudBudget = 100;
  prob.items = {{6.0, 5, {0, 0}, 5}, {5.0, 4, {4, 0}, 0}, {4.0, 3, {0, 0}, 3}};

  const auto sol = branchAndBound(prob);
  std::cout << "objective " << sol.objective << " after " << sol.nodes << " nodes\n";
  for (std::size_t j = 0; j < sol.selected.size(); ++j)
    std::cout << "item " << j << (sol.selected[j] ? " cached\n" : " skipped\n");
  writeProblem(std::cout, prob);
}
