#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/milp.hpp"
#include "apollo/prediction.hpp"

namespace apollo {

/// Partial-solution size parameters and the L1 search radius.
struct TrustRegionSpec {
  int k0 = 0;     // variables fixed to 0 (lowest marginals)
  int k1 = 0;     // variables fixed to 1 (highest marginals)
  int delta = 0;  // trust-region radius

  void validate() const {
    if (k0 < 0 || k1 < 0) throw ConfigError("trust region: k0 and k1 must be >= 0");
    if (delta < 0) throw ConfigError("trust region: delta must be >= 0");
    if (delta > k0 + k1) throw ConfigError("trust region: delta must be <= k0 + k1");
  }
};

/// Partial solution from marginals: the k1 highest-probability unfixed binary
/// variables get value 1, then the k0 lowest among the rest get value 0. Ties
/// break toward the smaller variable index. Result indices are ascending.
inline PartialAssignment selectPartial(const MilpInstance& inst, const MarginalPrediction& pred,
                                       const TrustRegionSpec& spec) {
  spec.validate();
  std::vector<int> binIdx = inst.binaryIndices();
  if (pred.size() != binIdx.size())
    throw DimensionError("selectPartial: marginals cover " + std::to_string(pred.size()) +
                         " variables, instance has " + std::to_string(binIdx.size()) +
                         " binaries");
  struct Cand {
    int var;
    double prob;
  };
  std::vector<Cand> cands;
  for (std::size_t k = 0; k < binIdx.size(); ++k)
    if (!inst.isFixed(binIdx[k])) cands.push_back({binIdx[k], pred.probs[k]});
  if (spec.k0 + spec.k1 > static_cast<int>(cands.size()))
    throw ConfigError("selectPartial: k0+k1 = " + std::to_string(spec.k0 + spec.k1) +
                      " exceeds the " + std::to_string(cands.size()) +
                      " unfixed binary variables");

  std::vector<std::pair<int, double>> chosen;  // (var, value)
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.var < b.var;
  });
  for (int i = 0; i < spec.k1; ++i) chosen.emplace_back(cands[i].var, 1.0);
  std::vector<Cand> rest(cands.begin() + spec.k1, cands.end());
  std::sort(rest.begin(), rest.end(), [](const Cand& a, const Cand& b) {
    if (a.prob != b.prob) return a.prob < b.prob;
    return a.var < b.var;
  });
  for (int i = 0; i < spec.k0; ++i) chosen.emplace_back(rest[i].var, 0.0);

  std::sort(chosen.begin(), chosen.end());
  PartialAssignment pa;
  for (const auto& [var, value] : chosen) {
    pa.indices.push_back(var);
    pa.values.push_back(value);
  }
  return pa;
}

/// Appends the linearized L1 ball around the partial solution:
///   sum_{i in P, v_i = 1} (1 - x_i) + sum_{i in P, v_i = 0} x_i <= delta.
/// With delta = 0 the feasible set equals the one produced by bound-fixing
/// the same partial; with delta = |P| the row is vacuous.
inline MilpInstance buildTrustRegion(const MilpInstance& inst, const PartialAssignment& pa,
                                     int delta) {
  if (delta < 0) throw ConfigError("buildTrustRegion: delta must be >= 0");
  MilpInstance out = inst;
  int row = out.numRows();
  int ones = 0;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    int j = pa.indices[k];
    if (j < 0 || j >= inst.numVars)
      throw DimensionError("buildTrustRegion: index x" + std::to_string(j) + " out of range");
    if (inst.kinds[j] != VarKind::Binary)
      throw ConfigError("buildTrustRegion: x" + std::to_string(j) + " is not binary");
    if (pa.values[k] == 1.0) {
      out.triplets.push_back({row, j, -1.0});
      ++ones;
    } else {
      out.triplets.push_back({row, j, 1.0});
    }
  }
  out.senses.push_back(RowSense::LessEqual);
  out.rhs.push_back(static_cast<double>(delta - ones));
  return out;
}

}  // namespace apollo
