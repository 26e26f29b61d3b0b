#pragma once

// Dense bounded-variable primal simplex for
//   max c.x  s.t.  A x <= b,  0 <= x <= u
// with b >= 0, so the all-zero point (slack basis) is feasible and no phase 1
// is needed. Sized for a handful of rows and a few hundred columns.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "edgecache/types.hpp"

namespace edgecache::lp {

struct Problem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> upper;  // per column, finite

  double& at(std::size_t r, std::size_t j) { return a[r * cols + j]; }
  double at(std::size_t r, std::size_t j) const { return a[r * cols + j]; }
};

enum class Status { Optimal, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Optimal;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

inline Result solve(const Problem& p, double eps = 1e-10) {
  const std::size_t m = p.rows;
  const std::size_t n = p.cols;
  const std::size_t total = n + m;
  const double inf = std::numeric_limits<double>::infinity();

  enum : unsigned char { kBasic, kLower, kUpper };

  // Tableau rows: B^-1 [A | I]; objective row holds reduced costs.
  std::vector<double> t(m * total, 0.0);
  std::vector<double> d(total, 0.0);
  std::vector<double> beta(p.b);
  std::vector<double> ub(total, inf);
  std::vector<unsigned char> state(total, kLower);
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) t[r * total + j] = p.at(r, j);
    t[r * total + n + r] = 1.0;
    basis[r] = n + r;
    state[n + r] = kBasic;
    if (beta[r] < 0.0) throw Error("lp-infeasible-start", "right-hand side must be nonnegative");
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = p.c[j];
    ub[j] = p.upper[j];
  }

  Result res;
  double objective = 0.0;
  std::size_t degenerate = 0;
  const std::size_t maxIter = 50 * (total + 10);

  for (;;) {
    if (res.iterations++ > maxIter) {
      res.status = Status::IterationLimit;
      break;
    }
    // Entering column: Dantzig, falling back to Bland after a degenerate streak.
    const bool bland = degenerate > 2 * total;
    std::size_t enter = total;
    double bestGain = 0.0;
    int dir = 0;
    for (std::size_t j = 0; j < total; ++j) {
      if (state[j] == kBasic) continue;
      int dj = 0;
      if (state[j] == kLower && d[j] > eps) dj = +1;
      if (state[j] == kUpper && d[j] < -eps) dj = -1;
      if (dj == 0) continue;
      const double gain = std::abs(d[j]);
      if (bland) {
        enter = j;
        dir = dj;
        break;
      }
      if (gain > bestGain) {
        bestGain = gain;
        enter = j;
        dir = dj;
      }
    }
    if (enter == total) break;

    // Ratio test.
    double step = ub[enter];
    std::size_t leaveRow = m;
    unsigned char leaveTo = kLower;
    double leavePivot = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double alpha = dir * t[r * total + enter];
      double limit = inf;
      unsigned char to = kLower;
      if (alpha > eps) {
        limit = std::max(0.0, beta[r]) / alpha;
        to = kLower;
      } else if (alpha < -eps && ub[basis[r]] < inf) {
        limit = std::max(0.0, ub[basis[r]] - beta[r]) / -alpha;
        to = kUpper;
      } else {
        continue;
      }
      // Ties prefer the larger pivot for stability.
      const bool better = limit < step - 1e-13 ||
                          (leaveRow < m && limit <= step + 1e-13 && std::abs(alpha) > std::abs(leavePivot));
      if (better) {
        step = limit;
        leaveRow = r;
        leaveTo = to;
        leavePivot = alpha;
      }
    }
    if (step == inf) {
      res.status = Status::Unbounded;
      break;
    }
    degenerate = step <= eps ? degenerate + 1 : 0;

    for (std::size_t r = 0; r < m; ++r) beta[r] -= dir * step * t[r * total + enter];
    objective += dir * step * d[enter];

    if (leaveRow == m) {
      state[enter] = state[enter] == kLower ? kUpper : kLower;  // bound flip
      continue;
    }

    const double enterValue = (state[enter] == kLower ? 0.0 : ub[enter]) + dir * step;
    const std::size_t leaving = basis[leaveRow];
    state[leaving] = leaveTo;
    state[enter] = kBasic;
    basis[leaveRow] = enter;
    beta[leaveRow] = enterValue;

    double* prow = &t[leaveRow * total];
    const double piv = prow[enter];
    for (std::size_t j = 0; j < total; ++j) prow[j] /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leaveRow) continue;
      double* row = &t[r * total];
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < total; ++j) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    const double fd = d[enter];
    for (std::size_t j = 0; j < total; ++j) d[j] -= fd * prow[j];
    d[enter] = 0.0;
  }

  res.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    if (state[j] == kUpper) res.x[j] = ub[j];
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = std::min(std::max(beta[r], 0.0), ub[basis[r]]);
  // Recompute rather than trust the running sum.
  objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) objective += p.c[j] * res.x[j];
  res.objective = objective;
  return res;
}

}  // namespace edgecache::lp
