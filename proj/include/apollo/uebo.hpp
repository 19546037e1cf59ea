#pragma once

// Uncertainty-based scoring of predicted variable values against the
// reference solution returned by the trust-region search. For a Bernoulli
// marginal p and a one-hot reference value r,
//
//   entropy      H(p) = -p ln p - (1-p) ln(1-p)
//   discrepancy  d    = -ln p   (r = 1)    or    -ln(1-p)   (r = 0)
//   score        H + d
//
// upper-bounds the KL divergence between the marginal and the (unknown)
// optimal-solution distribution. The score is strictly decreasing in p for
// r = 1 and strictly increasing for r = 0, so ranking by it is equivalent to
// ranking by prediction-correction agreement; fixing exactly the agreeing
// variables picks the minimum-score subset. Natural logarithm throughout.

#include <cmath>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/milp.hpp"
#include "apollo/prediction.hpp"

namespace apollo {

struct UeboEntry {
  int varIndex = -1;
  double p = 0.5;          // clamped marginal
  int predictedValue = 0;  // x-hat
  int refValue = 0;        // x-tilde
  double entropy = 0.0;
  double discrepancy = 0.0;
  double uebo = 0.0;
  bool consistent = false;  // predictedValue == refValue
};

/// Core scalar op. When the predicted value is not supplied it defaults to
/// thresholding the marginal at 0.5.
inline UeboEntry ueboEntry(double p, int refValue, int predictedValue = -1) {
  UeboEntry e;
  e.p = clampProb(p);
  e.refValue = refValue;
  e.predictedValue = predictedValue >= 0 ? predictedValue : (p >= 0.5 ? 1 : 0);
  e.entropy = -e.p * std::log(e.p) - (1.0 - e.p) * std::log(1.0 - e.p);
  e.discrepancy = refValue == 1 ? -std::log(e.p) : -std::log(1.0 - e.p);
  e.uebo = e.entropy + e.discrepancy;
  e.consistent = e.predictedValue == e.refValue;
  return e;
}

/// Scores every variable of the predicted partial solution against the
/// reference solution. Reference values are rounded to the nearest integer.
inline std::vector<UeboEntry> ueboReport(const MilpInstance& inst,
                                         const PartialAssignment& predicted,
                                         const MarginalPrediction& pred,
                                         const Assignment& reference) {
  requireSameLength(inst, reference);
  std::vector<int> binIdx = inst.binaryIndices();
  if (pred.size() != binIdx.size())
    throw DimensionError("ueboReport: marginals/binary count mismatch");
  std::vector<int> binSlot(static_cast<std::size_t>(inst.numVars), -1);
  for (std::size_t k = 0; k < binIdx.size(); ++k) binSlot[binIdx[k]] = static_cast<int>(k);

  std::vector<UeboEntry> out;
  out.reserve(predicted.size());
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    int j = predicted.indices[k];
    if (binSlot[j] < 0) throw ConfigError("ueboReport: x" + std::to_string(j) + " is not binary");
    int ref = static_cast<int>(std::round(reference[j]));
    UeboEntry e = ueboEntry(pred.probs[binSlot[j]], ref,
                            static_cast<int>(predicted.values[k]));
    e.varIndex = j;
    out.push_back(e);
  }
  return out;
}

/// Consistency-based fixing: keep exactly the positions where prediction and
/// reference agree, at the shared value. May be empty.
inline PartialAssignment fixConsistent(const PartialAssignment& predicted,
                                       const Assignment& reference) {
  PartialAssignment out;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    int j = predicted.indices[k];
    if (j < 0 || j >= static_cast<int>(reference.size()))
      throw DimensionError("fixConsistent: index x" + std::to_string(j) + " out of range");
    double ref = std::round(reference[j]);
    if (ref == predicted.values[k]) {
      out.indices.push_back(j);
      out.values.push_back(ref);
    }
  }
  return out;
}

/// Ablation: fix all of P at the reference values.
inline PartialAssignment fixDirect(const Assignment& reference, const std::vector<int>& P) {
  PartialAssignment out;
  for (int j : P) {
    if (j < 0 || j >= static_cast<int>(reference.size()))
      throw DimensionError("fixDirect: index x" + std::to_string(j) + " out of range");
    out.indices.push_back(j);
    out.values.push_back(std::round(reference[j]));
  }
  return out;
}

/// Ablation: fix the predicted partial solution as-is.
inline PartialAssignment fixPredicted(const PartialAssignment& predicted) { return predicted; }

}  // namespace apollo
