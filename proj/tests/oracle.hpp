#pragma once

// Test-side brute force, kept deliberately naive and independent of the
// library's solve path: dense re-evaluation of every row for every candidate
// assignment, no incremental updates, no shared helpers.

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>

#include "apollo/milp.hpp"

namespace testoracle {

inline bool naiveFeasible(const apollo::MilpInstance& inst, const std::vector<double>& x,
                          double tol = 1e-6) {
  const int m = inst.numRows();
  std::vector<double> activity(static_cast<std::size_t>(m), 0.0);
  for (const apollo::Triplet& t : inst.triplets) activity[t.row] += t.value * x[t.col];
  for (int r = 0; r < m; ++r) {
    double a = activity[r], b = inst.rhs[r];
    switch (inst.senses[r]) {
      case apollo::RowSense::LessEqual:
        if (a > b + tol) return false;
        break;
      case apollo::RowSense::GreaterEqual:
        if (a < b - tol) return false;
        break;
      case apollo::RowSense::Equal:
        if (std::fabs(a - b) > tol) return false;
        break;
    }
  }
  for (int j = 0; j < inst.numVars; ++j) {
    if (std::isfinite(inst.lower[j]) && x[j] < inst.lower[j] - tol) return false;
    if (std::isfinite(inst.upper[j]) && x[j] > inst.upper[j] + tol) return false;
  }
  return true;
}

/// All feasible 0/1 assignments of a pure-binary instance, as bitmasks with
/// bit j = value of variable j. Exponential; callers keep numVars small.
inline std::set<std::uint64_t> feasibleSet(const apollo::MilpInstance& inst,
                                           double tol = 1e-6) {
  std::set<std::uint64_t> out;
  const int n = inst.numVars;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    for (int j = 0; j < n; ++j) x[j] = static_cast<double>((bits >> j) & 1ULL);
    if (naiveFeasible(inst, x, tol)) out.insert(bits);
  }
  return out;
}

/// Exact optimum of a pure-binary instance by full enumeration.
inline std::optional<std::pair<double, std::uint64_t>> bruteOptimum(
    const apollo::MilpInstance& inst, double tol = 1e-6) {
  std::optional<std::pair<double, std::uint64_t>> best;
  const int n = inst.numVars;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    for (int j = 0; j < n; ++j) x[j] = static_cast<double>((bits >> j) & 1ULL);
    if (!naiveFeasible(inst, x, tol)) continue;
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += inst.objective[j] * x[j];
    if (!best || obj < best->first) best = {obj, bits};
  }
  return best;
}

inline apollo::Assignment fromBits(int numVars, std::uint64_t bits) {
  apollo::Assignment a;
  a.values.resize(static_cast<std::size_t>(numVars));
  for (int j = 0; j < numVars; ++j) a.values[j] = static_cast<double>((bits >> j) & 1ULL);
  return a;
}

}  // namespace testoracle
