#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/lp_format.hpp"
#include "apollo/milp.hpp"

namespace apollo {

/// Collected near-optimal feasible solutions, sorted ascending by objective.
/// The pool approximates the energy-weighted solution distribution, so its
/// members double as probability-target evidence.
struct SolutionPool {
  struct Entry {
    Assignment assignment;
    double objective;
  };
  std::vector<Entry> entries;
  int capacity = 0;  // 0 means unbounded

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  const Entry& best() const { return entries.front(); }

  /// Ordered insert; evicts the worst entry when over capacity.
  void insert(Assignment a, double objective) {
    auto it = entries.begin();
    while (it != entries.end() && it->objective <= objective) ++it;
    entries.insert(it, Entry{std::move(a), objective});
    if (capacity > 0 && static_cast<int>(entries.size()) > capacity) entries.pop_back();
  }
};

/// Per-binary-variable probability targets.
struct ProbTarget {
  std::vector<double> values;  // one per binary variable, ascending var index
};

/// Energy-weighted frequency of value 1 per binary variable:
///   p_i = sum_{x in pool, x_i = 1} w(x) / sum_{x in pool} w(x),
///   w(x) = exp(-(c.x - min_pool c.x)).
/// The shift by the pool minimum cancels in the ratio and keeps exp() in
/// range for large objective magnitudes.
inline ProbTarget poolTargets(const MilpInstance& inst, const SolutionPool& pool) {
  if (pool.empty()) throw ConfigError("poolTargets: empty solution pool");
  double shift = pool.entries.front().objective;
  for (const auto& e : pool.entries) shift = std::min(shift, e.objective);

  std::vector<int> binIdx = inst.binaryIndices();
  ProbTarget target;
  target.values.assign(binIdx.size(), 0.0);
  double totalWeight = 0.0;
  for (const auto& e : pool.entries) {
    if (static_cast<int>(e.assignment.size()) != inst.numVars)
      throw DimensionError("poolTargets: pool member length mismatch");
    double w = std::exp(-(e.objective - shift));
    totalWeight += w;
    for (std::size_t k = 0; k < binIdx.size(); ++k)
      if (std::fabs(e.assignment[binIdx[k]] - 1.0) <= 0.5) target.values[k] += w;
  }
  for (double& v : target.values) v /= totalWeight;
  return target;
}

// Pool text format: '#'-prefixed metadata lines, then one line per solution
// holding the objective followed by all variable values, %.17g each.
inline std::string poolToText(const SolutionPool& pool, const std::string& instanceName,
                              const std::string& status = "ok") {
  std::string out = "# apollo solution pool v1\n";
  out += "# instance " + instanceName + "\n";
  out += "# status " + status + "\n";
  out += "# count " + std::to_string(pool.size()) + "\n";
  for (const auto& e : pool.entries) {
    out += fmt17(e.objective);
    for (double v : e.assignment.values) out += " " + fmt17(v);
    out += "\n";
  }
  return out;
}

inline SolutionPool poolFromText(const std::string& text, int expectedVars = -1) {
  SolutionPool pool;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double obj;
    if (!(ls >> obj)) throw ParseError("pool: malformed objective", lineNo, 1);
    Assignment a;
    double v;
    while (ls >> v) a.values.push_back(v);
    if (expectedVars >= 0 && static_cast<int>(a.size()) != expectedVars)
      throw ParseError("pool: expected " + std::to_string(expectedVars) + " values, got " +
                           std::to_string(a.size()),
                       lineNo, 1);
    pool.insert(std::move(a), obj);
  }
  return pool;
}

}  // namespace apollo
