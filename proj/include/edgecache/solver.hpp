#pragma once

// Per-period 0-1 placement program:
//
//   max  sum_j  tau_j * Ps_j
//   s.t. sum_j  tau_j * s_j    <= SC          (shared cache area)
//        sum_j  tau_j * A_j^p  <= budget_p    (one row per neighbor link)
//        sum_j  tau_j * B_j    <= budget_cloud
//
// solved exactly by best-first branch-and-bound over LP relaxations, with an
// exhaustive oracle for small instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "edgecache/lp.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct PlacementItem {
  double utility = 0.0;
  Bytes size = 0;
  std::vector<Bytes> neighborCost;
  Bytes cloudCost = 0;
};

struct PlacementProblem {
  std::vector<PlacementItem> items;
  Bytes capacity = 0;
  std::vector<Bytes> neighborBudgets;
  Bytes cloudBudget = 0;

  std::size_t rows() const { return 2 + neighborBudgets.size(); }

  Bytes coefficient(std::size_t row, std::size_t item) const {
    const auto& it = items[item];
    if (row == 0) return it.size;
    if (row == rows() - 1) return it.cloudCost;
    return it.neighborCost[row - 1];
  }

  Bytes limit(std::size_t row) const {
    if (row == 0) return capacity;
    if (row == rows() - 1) return cloudBudget;
    return neighborBudgets[row - 1];
  }

  void validate() const {
    for (const auto& it : items) {
      if (!(it.utility >= 0.0) || !std::isfinite(it.utility))
        throw Error("invalid-problem", "utilities must be finite and nonnegative");
      if (it.neighborCost.size() != neighborBudgets.size())
        throw Error("invalid-problem", "neighbor cost arity does not match the budgets");
    }
  }

  bool feasible(std::span<const std::uint8_t> tau) const {
    for (std::size_t r = 0; r < rows(); ++r) {
      unsigned __int128 sum = 0;
      for (std::size_t j = 0; j < items.size(); ++j)
        if (tau[j]) sum += coefficient(r, j);
      if (sum > limit(r)) return false;
    }
    return true;
  }

  /// Objective summed in item order, so equal selections give identical values.
  double objective(std::span<const std::uint8_t> tau) const {
    double v = 0.0;
    for (std::size_t j = 0; j < items.size(); ++j)
      if (tau[j]) v += items[j].utility;
    return v;
  }
};

enum class SolveStatus { Optimal, NodeLimit };

inline const char* toString(SolveStatus s) { return s == SolveStatus::Optimal ? "optimal" : "node-limit"; }

struct PlacementSolution {
  std::vector<std::uint8_t> selected;
  double objective = 0.0;
  std::size_t nodes = 0;
  SolveStatus status = SolveStatus::Optimal;
};

// ---------------------------------------------------------------------------
// LP relaxation

struct Relaxation {
  bool feasible = false;
  std::vector<double> x;
  double bound = 0.0;
};

/// LP relaxation with 0 <= tau <= 1 under a partial assignment
/// (`fixed[j]` = -1 free, 0 or 1). Fixed-to-one items are moved to the right
/// hand side; a negative residual means no completion exists. Rows are scaled
/// by their residual so coefficients are O(1).
inline Relaxation solveRelaxation(const PlacementProblem& prob, std::span<const std::int8_t> fixed) {
  const std::size_t n = prob.items.size();
  const std::size_t rows = prob.rows();
  Relaxation out;
  out.x.assign(n, 0.0);

  std::vector<long double> residual(rows);
  for (std::size_t r = 0; r < rows; ++r) residual[r] = static_cast<long double>(prob.limit(r));
  double fixedValue = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (fixed[j] != 1) continue;
    out.x[j] = 1.0;
    fixedValue += prob.items[j].utility;
    for (std::size_t r = 0; r < rows; ++r) residual[r] -= prob.coefficient(r, j);
  }
  for (auto v : residual)
    if (v < 0) return out;

  // Free columns; a free item touching an exhausted row is forced to zero.
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < n; ++j) {
    if (fixed[j] != -1) continue;
    bool blocked = false;
    for (std::size_t r = 0; r < rows && !blocked; ++r)
      blocked = residual[r] == 0 && prob.coefficient(r, j) > 0;
    if (!blocked) cols.push_back(j);
  }
  std::vector<std::size_t> activeRows;
  for (std::size_t r = 0; r < rows; ++r) {
    bool used = false;
    for (auto j : cols) used = used || prob.coefficient(r, j) > 0;
    if (used && residual[r] > 0) activeRows.push_back(r);
  }

  out.feasible = true;
  double lpValue = 0.0;
  if (!cols.empty()) {
    lp::Problem p;
    p.rows = activeRows.size();
    p.cols = cols.size();
    p.a.assign(p.rows * p.cols, 0.0);
    p.b.assign(p.rows, 1.0);
    p.c.resize(p.cols);
    p.upper.assign(p.cols, 1.0);
    for (std::size_t jj = 0; jj < cols.size(); ++jj) p.c[jj] = prob.items[cols[jj]].utility;
    for (std::size_t rr = 0; rr < activeRows.size(); ++rr) {
      const long double scale = residual[activeRows[rr]];
      for (std::size_t jj = 0; jj < cols.size(); ++jj)
        p.at(rr, jj) = static_cast<double>(prob.coefficient(activeRows[rr], cols[jj]) / scale);
    }
    const auto res = lp::solve(p);
    if (res.status != lp::Status::Optimal) throw Error("lp-failure", "relaxation did not converge");
    for (std::size_t jj = 0; jj < cols.size(); ++jj) out.x[cols[jj]] = res.x[jj];
    lpValue = res.objective;
  }
  out.bound = fixedValue + lpValue;
  return out;
}

// ---------------------------------------------------------------------------
// Branch and bound

struct SearchNode {
  std::size_t id = 0;
  std::size_t parent = 0;  // == id for the root
  double bound = 0.0;
  std::optional<double> integral;  // objective if the relaxation was integral
};

struct BranchOptions {
  std::size_t nodeLimit = 1'000'000;
  double tolerance = 1e-9;
  std::vector<SearchNode>* trace = nullptr;  // optional record of every solved node
};

namespace detail {

inline bool isIntegral(double v) { return v <= 1e-9 || v >= 1.0 - 1e-9; }

/// Adds items in index order while every row still fits.
inline void completeSelection(const PlacementProblem& prob, std::vector<std::uint8_t>& tau, bool zeroOnly) {
  const std::size_t rows = prob.rows();
  std::vector<unsigned __int128> used(rows, 0);
  for (std::size_t j = 0; j < tau.size(); ++j)
    if (tau[j])
      for (std::size_t r = 0; r < rows; ++r) used[r] += prob.coefficient(r, j);
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (tau[j] || (zeroOnly && prob.items[j].utility > 0.0)) continue;
    bool fits = true;
    for (std::size_t r = 0; r < rows && fits; ++r) fits = used[r] + prob.coefficient(r, j) <= prob.limit(r);
    if (!fits) continue;
    tau[j] = 1;
    for (std::size_t r = 0; r < rows; ++r) used[r] += prob.coefficient(r, j);
  }
}

}  // namespace detail

/// Exact 0-1 solve. Best-first on the relaxation bound; branches on the
/// variable whose fractional part is closest to 0.5 (ties: lowest index),
/// exploring the tau = 1 child first. Zero-utility items cannot raise the
/// objective, so they are left out of the search and afterwards added in item
/// order wherever they still fit; when everything fits, everything is selected.
inline PlacementSolution branchAndBound(const PlacementProblem& prob, const BranchOptions& opt = {}) {
  prob.validate();
  const std::size_t n = prob.items.size();
  PlacementSolution sol;
  sol.selected.assign(n, 0);
  if (n == 0) return sol;

  // Root fixings: zero-utility items and items that exceed some limit alone.
  std::vector<std::int8_t> rootFix(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    if (prob.items[j].utility <= 0.0) rootFix[j] = 0;
    for (std::size_t r = 0; r < prob.rows(); ++r)
      if (prob.coefficient(r, j) > prob.limit(r)) rootFix[j] = 0;
  }

  // Greedy incumbent by utility per unit of normalized weight.
  std::vector<std::uint8_t> incumbent(n, 0);
  {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < n; ++j)
      if (rootFix[j] == -1) order.push_back(j);
    auto weight = [&](std::size_t j) {
      double w = 0.0;
      for (std::size_t r = 0; r < prob.rows(); ++r)
        if (prob.limit(r) > 0) w += static_cast<double>(prob.coefficient(r, j)) / static_cast<double>(prob.limit(r));
      return w;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return prob.items[a].utility * weight(b) > prob.items[b].utility * weight(a);
    });
    std::vector<unsigned __int128> used(prob.rows(), 0);
    for (auto j : order) {
      bool fits = true;
      for (std::size_t r = 0; r < prob.rows() && fits; ++r) fits = used[r] + prob.coefficient(r, j) <= prob.limit(r);
      if (!fits) continue;
      incumbent[j] = 1;
      for (std::size_t r = 0; r < prob.rows(); ++r) used[r] += prob.coefficient(r, j);
    }
  }
  double best = prob.objective(incumbent);

  struct Node {
    double bound;
    std::size_t id;
    std::size_t branchVar;
    std::vector<std::int8_t> fix;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;  // earlier nodes first on equal bounds
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

  std::size_t nextId = 0;
  bool limitHit = false;

  // Solves a node; pushes it when it still needs branching.
  auto evaluate = [&](std::vector<std::int8_t> fix, std::size_t parent) {
    if (sol.nodes >= opt.nodeLimit) {
      limitHit = true;
      return;
    }
    ++sol.nodes;
    const std::size_t id = nextId++;
    const Relaxation rel = solveRelaxation(prob, fix);
    SearchNode rec{id, parent == std::numeric_limits<std::size_t>::max() ? id : parent, rel.bound, std::nullopt};
    if (!rel.feasible) {
      if (opt.trace) opt.trace->push_back(rec);
      return;
    }

    std::size_t branchVar = n;
    double bestDist = 2.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (fix[j] != -1 || detail::isIntegral(rel.x[j])) continue;
      const double dist = std::abs(rel.x[j] - 0.5);
      if (dist < bestDist) {
        bestDist = dist;
        branchVar = j;
      }
    }
    if (branchVar == n) {
      std::vector<std::uint8_t> tau(n);
      for (std::size_t j = 0; j < n; ++j) tau[j] = rel.x[j] >= 0.5 ? 1 : 0;
      if (prob.feasible(tau)) {
        const double v = prob.objective(tau);
        rec.integral = v;
        if (v > best + opt.tolerance) {
          best = v;
          incumbent = std::move(tau);
        }
        if (opt.trace) opt.trace->push_back(rec);
        return;
      }
      // Rounding broke a row: branch on the weakest variable rounded up.
      double lowest = 2.0;
      for (std::size_t j = 0; j < n; ++j)
        if (fix[j] == -1 && tau[j] && rel.x[j] < lowest) lowest = rel.x[j], branchVar = j;
      if (branchVar == n) {
        if (opt.trace) opt.trace->push_back(rec);
        return;
      }
    }
    if (opt.trace) opt.trace->push_back(rec);
    if (rel.bound <= best + opt.tolerance) return;
    open.push(Node{rel.bound, id, branchVar, std::move(fix)});
  };

  evaluate(rootFix, std::numeric_limits<std::size_t>::max());
  while (!open.empty() && !limitHit) {
    Node node = open.top();
    open.pop();
    if (node.bound <= best + opt.tolerance) break;  // best-first: nothing left can improve
    auto one = node.fix;
    one[node.branchVar] = 1;
    evaluate(std::move(one), node.id);
    auto zero = std::move(node.fix);
    zero[node.branchVar] = 0;
    evaluate(std::move(zero), node.id);
  }

  sol.status = limitHit ? SolveStatus::NodeLimit : SolveStatus::Optimal;
  sol.selected = std::move(incumbent);
  detail::completeSelection(prob, sol.selected, sol.status == SolveStatus::Optimal);
  sol.objective = prob.objective(sol.selected);
  return sol;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

inline constexpr std::size_t kOracleMaxItems = 22;

/// Enumerates every feasible subset in lexicographic order of the selection
/// vector (item 0 most significant, 0 before 1) and keeps the first strict
/// improvement, so ties resolve to the lexicographically smallest vector.
inline PlacementSolution bruteForceOracle(const PlacementProblem& prob) {
  prob.validate();
  const std::size_t n = prob.items.size();
  if (n > kOracleMaxItems)
    throw Error("oracle-too-large", "exhaustive search limited to " + std::to_string(kOracleMaxItems) + " items");
  const std::size_t rows = prob.rows();

  PlacementSolution sol;
  sol.selected.assign(n, 0);
  std::vector<std::uint8_t> cur(n, 0);
  std::vector<unsigned __int128> used(rows, 0);
  double best = -1.0;

  std::function<void(std::size_t)> walk = [&](std::size_t j) {
    if (j == n) {
      ++sol.nodes;
      const double v = prob.objective(cur);
      if (v > best) {
        best = v;
        sol.selected = cur;
      }
      return;
    }
    cur[j] = 0;
    walk(j + 1);
    bool fits = true;
    for (std::size_t r = 0; r < rows && fits; ++r) fits = used[r] + prob.coefficient(r, j) <= prob.limit(r);
    if (!fits) return;
    for (std::size_t r = 0; r < rows; ++r) used[r] += prob.coefficient(r, j);
    cur[j] = 1;
    walk(j + 1);
    cur[j] = 0;
    for (std::size_t r = 0; r < rows; ++r) used[r] -= prob.coefficient(r, j);
  };
  walk(0);
  sol.objective = prob.objective(sol.selected);
  return sol;
}

// ---------------------------------------------------------------------------
// Text dump format
//
//   # comment
//   budgets <SC> <budget_1> ... <budget_P> <cloud>
//   <Ps> <s> <A_1> ... <A_P> <B>        (one line per item)

inline void writeProblem(std::ostream& os, const PlacementProblem& prob) {
  os << "budgets " << prob.capacity;
  for (auto b : prob.neighborBudgets) os << ' ' << b;
  os << ' ' << prob.cloudBudget << '\n';
  os.precision(17);
  for (const auto& it : prob.items) {
    os << it.utility << ' ' << it.size;
    for (auto a : it.neighborCost) os << ' ' << a;
    os << ' ' << it.cloudCost << '\n';
  }
}

inline PlacementProblem readProblem(std::istream& is) {
  PlacementProblem prob;
  std::string line;
  bool haveBudgets = false;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!haveBudgets) {
      std::string tag;
      ls >> tag;
      if (tag != "budgets") throw Error("parse", "line " + std::to_string(lineNo) + ": expected 'budgets'");
      std::vector<Bytes> vals;
      Bytes v;
      while (ls >> v) vals.push_back(v);
      if (vals.size() < 2) throw Error("parse", "line " + std::to_string(lineNo) + ": need SC and cloud budget");
      prob.capacity = vals.front();
      prob.cloudBudget = vals.back();
      prob.neighborBudgets.assign(vals.begin() + 1, vals.end() - 1);
      haveBudgets = true;
      continue;
    }
    PlacementItem it;
    std::vector<Bytes> vals;
    if (!(ls >> it.utility)) throw Error("parse", "line " + std::to_string(lineNo) + ": bad utility");
    Bytes v;
    while (ls >> v) vals.push_back(v);
    if (vals.size() != prob.neighborBudgets.size() + 2)
      throw Error("parse", "line " + std::to_string(lineNo) + ": expected " +
                               std::to_string(prob.neighborBudgets.size() + 2) + " integer fields");
    it.size = vals.front();
    it.cloudCost = vals.back();
    it.neighborCost.assign(vals.begin() + 1, vals.end() - 1);
    prob.items.push_back(std::move(it));
  }
  if (!haveBudgets) throw Error("parse", "missing budgets line");
  prob.validate();
  return prob;
}

}  // namespace edgecache
