#pragma once

// Seeded synthetic families used for training and desk-scale experiments.
//
// CA (combinatorial auction), arbitrary-relationships style: items carry a
// common value; each bid draws a bundle by starting from a uniform item and
// growing it while a coin with probability addItemProb keeps coming up heads
// (capped at maxSubItems items). The bid price is the sum of privately
// perturbed item values plus a superadditivity bonus |B|^(1+additivity).
// Winner determination maximizes total price, stored as minimization of the
// negated prices with one <=-1 row per item.
//
// SC (set covering), density style: the coverage pattern has exactly
//   nnz = max(round(density*rows*cols), 2*rows, cols)
// nonzeros, built so that every row has at least two covering columns and
// every column covers at least one row. Costs are uniform integers in
// [1, maxCost]; rows are >=-1 covering constraints.
//
// Both generators draw exclusively through apollo/rng.hpp helpers on
// std::mt19937_64, so a (family, params, seed) triple pins the instance
// byte-for-byte across platforms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/milp.hpp"
#include "apollo/rng.hpp"

namespace apollo {

struct CaParams {
  int items = 100;
  int bids = 300;
  std::uint64_t seed = 0;
  double addItemProb = 0.7;
  int maxSubItems = 5;
  double additivity = 0.2;
  double valueDeviation = 0.5;

  void validate() const {
    if (items < 1 || bids < 1) throw ConfigError("ca: items and bids must be >= 1");
    if (addItemProb <= 0.0 || addItemProb >= 1.0)
      throw ConfigError("ca: addItemProb must be in (0,1)");
    if (maxSubItems < 1) throw ConfigError("ca: maxSubItems must be >= 1");
  }
};

struct ScParams {
  int rows = 150;
  int cols = 250;
  double density = 0.1;
  int maxCost = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (rows < 1 || cols < 2) throw ConfigError("sc: need rows >= 1 and cols >= 2");
    if (density <= 0.0 || density > 1.0) throw ConfigError("sc: density must be in (0,1]");
    if (density * cols < 1.0) throw ConfigError("sc: density*cols must be >= 1");
    if (maxCost < 1) throw ConfigError("sc: maxCost must be >= 1");
  }

  long long nonzeroCount() const {
    long long target = std::llround(density * static_cast<double>(rows) * cols);
    return std::max({target, 2LL * rows, static_cast<long long>(cols)});
  }
};

inline MilpInstance genCa(const CaParams& p) {
  p.validate();
  Rng rng(p.seed);

  std::vector<double> itemValue(static_cast<std::size_t>(p.items));
  for (double& v : itemValue) v = uniformReal(rng, 1.0, 100.0);

  const int cap = std::min(p.items, p.maxSubItems);
  std::vector<std::vector<int>> bundles(static_cast<std::size_t>(p.bids));
  std::vector<double> price(static_cast<std::size_t>(p.bids));
  std::vector<char> inBundle(static_cast<std::size_t>(p.items), 0);

  for (int b = 0; b < p.bids; ++b) {
    for (;;) {
      std::vector<int> bundle;
      bundle.push_back(static_cast<int>(uniformIndex(rng, p.items)));
      inBundle[bundle[0]] = 1;
      while (static_cast<int>(bundle.size()) < cap && uniform01(rng) < p.addItemProb) {
        int j;
        do {
          j = static_cast<int>(uniformIndex(rng, p.items));
        } while (inBundle[j]);
        inBundle[j] = 1;
        bundle.push_back(j);
      }
      std::sort(bundle.begin(), bundle.end());
      double value = 0.0;
      for (int i : bundle)
        value += itemValue[i] + 100.0 * p.valueDeviation * uniformReal(rng, -1.0, 1.0);
      value += std::pow(static_cast<double>(bundle.size()), 1.0 + p.additivity);
      for (int i : bundle) inBundle[i] = 0;
      if (value > 0.0) {
        bundles[b] = std::move(bundle);
        price[b] = value;
        break;
      }
      // worthless bundle, redraw the bid
    }
  }

  MilpInstance inst;
  inst.name = "ca-i" + std::to_string(p.items) + "-b" + std::to_string(p.bids) + "-s" +
              std::to_string(p.seed);
  inst.numVars = p.bids;
  inst.objective.resize(p.bids);
  for (int b = 0; b < p.bids; ++b) inst.objective[b] = -price[b];
  inst.lower.assign(p.bids, 0.0);
  inst.upper.assign(p.bids, 1.0);
  inst.kinds.assign(p.bids, VarKind::Binary);
  std::vector<std::vector<int>> itemBids(static_cast<std::size_t>(p.items));
  for (int b = 0; b < p.bids; ++b)
    for (int i : bundles[b]) itemBids[i].push_back(b);
  for (int i = 0; i < p.items; ++i) {
    for (int b : itemBids[i]) inst.triplets.push_back({i, b, 1.0});
    inst.senses.push_back(RowSense::LessEqual);
    inst.rhs.push_back(1.0);
  }
  inst.validate();
  return inst;
}

inline MilpInstance genSc(const ScParams& p) {
  p.validate();
  Rng rng(p.seed);

  const long long target = p.nonzeroCount();
  std::vector<std::vector<int>> rowCols(static_cast<std::size_t>(p.rows));
  std::vector<int> colCount(static_cast<std::size_t>(p.cols), 0);
  std::vector<char> present(static_cast<std::size_t>(p.rows) * p.cols, 0);
  auto has = [&](int r, int c) { return present[static_cast<std::size_t>(r) * p.cols + c]; };
  auto put = [&](int r, int c) {
    present[static_cast<std::size_t>(r) * p.cols + c] = 1;
    rowCols[r].push_back(c);
    ++colCount[c];
  };
  long long count = 0;

  // two covering columns per row
  for (int r = 0; r < p.rows; ++r) {
    int c1 = static_cast<int>(uniformIndex(rng, p.cols));
    int c2;
    do {
      c2 = static_cast<int>(uniformIndex(rng, p.cols));
    } while (c2 == c1);
    put(r, c1);
    put(r, c2);
    count += 2;
  }

  // every column must appear somewhere; swap against a count>=2 donor when the
  // nonzero budget is already spent
  for (int c = 0; c < p.cols; ++c) {
    if (colCount[c] > 0) continue;
    if (count < target) {
      int r = static_cast<int>(uniformIndex(rng, p.rows));
      put(r, c);
      ++count;
    } else {
      bool done = false;
      for (int r = 0; r < p.rows && !done; ++r) {
        for (std::size_t k = 0; k < rowCols[r].size(); ++k) {
          int donor = rowCols[r][k];
          if (colCount[donor] >= 2) {
            --colCount[donor];
            present[static_cast<std::size_t>(r) * p.cols + donor] = 0;
            rowCols[r][k] = c;
            ++colCount[c];
            present[static_cast<std::size_t>(r) * p.cols + c] = 1;
            done = true;
            break;
          }
        }
      }
      if (!done) throw ConfigError("sc: no donor column found during coverage repair");
    }
  }

  // spend the remaining budget uniformly over absent cells
  long long totalCells = static_cast<long long>(p.rows) * p.cols;
  while (count < target && count < totalCells) {
    if (totalCells - count < totalCells / 10) {
      // dense tail: choose among the absent cells directly
      std::vector<long long> absent;
      absent.reserve(static_cast<std::size_t>(totalCells - count));
      for (long long cell = 0; cell < totalCells; ++cell)
        if (!present[static_cast<std::size_t>(cell)]) absent.push_back(cell);
      while (count < target && !absent.empty()) {
        std::size_t pick = static_cast<std::size_t>(uniformIndex(rng, absent.size()));
        long long cell = absent[pick];
        absent.erase(absent.begin() + static_cast<std::ptrdiff_t>(pick));
        put(static_cast<int>(cell / p.cols), static_cast<int>(cell % p.cols));
        ++count;
      }
      break;
    }
    int r = static_cast<int>(uniformIndex(rng, p.rows));
    int c = static_cast<int>(uniformIndex(rng, p.cols));
    if (!has(r, c)) {
      put(r, c);
      ++count;
    }
  }

  MilpInstance inst;
  inst.name = "sc-r" + std::to_string(p.rows) + "-c" + std::to_string(p.cols) + "-s" +
              std::to_string(p.seed);
  inst.numVars = p.cols;
  inst.objective.resize(p.cols);
  for (int c = 0; c < p.cols; ++c)
    inst.objective[c] = static_cast<double>(uniformInt(rng, 1, p.maxCost));
  inst.lower.assign(p.cols, 0.0);
  inst.upper.assign(p.cols, 1.0);
  inst.kinds.assign(p.cols, VarKind::Binary);
  for (int r = 0; r < p.rows; ++r) {
    std::sort(rowCols[r].begin(), rowCols[r].end());
    for (int c : rowCols[r]) inst.triplets.push_back({r, c, 1.0});
    inst.senses.push_back(RowSense::GreaterEqual);
    inst.rhs.push_back(1.0);
  }
  inst.validate();
  return inst;
}

struct InstanceStats {
  int vars = 0;
  int cons = 0;
  long long nonzeros = 0;
  int binaries = 0;
};

inline InstanceStats instanceStats(const MilpInstance& inst) {
  InstanceStats s;
  s.vars = inst.numVars;
  s.cons = inst.numRows();
  s.nonzeros = static_cast<long long>(inst.triplets.size());
  s.binaries = inst.numBinary();
  return s;
}

}  // namespace apollo
