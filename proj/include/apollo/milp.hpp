#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "apollo/errors.hpp"

namespace apollo {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDefaultFeasTol = 1e-6;

enum class VarKind : unsigned char { Binary, Integer, Continuous };
enum class RowSense : unsigned char { LessEqual, GreaterEqual, Equal };

/// One nonzero of the constraint matrix.
struct Triplet {
  int row;
  int col;
  double value;
};

/// Sparse minimization model: min c'x  s.t.  Ax {<=,>=,=} b,  l <= x <= u,
/// with per-variable kinds. Instances are immutable after construction; all
/// reductions return new values.
class MilpInstance {
public:
  std::string name;
  int numVars = 0;
  std::vector<double> objective;      // dense c, length numVars
  std::vector<Triplet> triplets;      // row-major appearance order
  std::vector<RowSense> senses;       // per row
  std::vector<double> rhs;            // per row
  std::vector<double> lower;          // per variable, -inf allowed
  std::vector<double> upper;          // per variable, +inf allowed
  std::vector<VarKind> kinds;         // per variable

  int numRows() const { return static_cast<int>(rhs.size()); }

  int numBinary() const {
    return static_cast<int>(std::count(kinds.begin(), kinds.end(), VarKind::Binary));
  }

  bool pureBinary() const {
    return std::all_of(kinds.begin(), kinds.end(),
                       [](VarKind k) { return k == VarKind::Binary; });
  }

  /// A variable is fixed when its bounds have collapsed.
  bool isFixed(int var) const { return lower[var] == upper[var]; }

  /// Indices of binary variables in increasing order.
  std::vector<int> binaryIndices() const {
    std::vector<int> out;
    for (int j = 0; j < numVars; ++j)
      if (kinds[j] == VarKind::Binary) out.push_back(j);
    return out;
  }

  /// Unfixed binary variables in increasing order.
  std::vector<int> freeBinaryIndices() const {
    std::vector<int> out;
    for (int j = 0; j < numVars; ++j)
      if (kinds[j] == VarKind::Binary && !isFixed(j)) out.push_back(j);
    return out;
  }

  /// Structural checks; throws ConfigError on violation. Binary bounds may be
  /// [0,1], [0,0] or [1,1] (the last two arise from bound-fixing).
  void validate() const {
    if (static_cast<int>(objective.size()) != numVars ||
        static_cast<int>(lower.size()) != numVars ||
        static_cast<int>(upper.size()) != numVars ||
        static_cast<int>(kinds.size()) != numVars)
      throw ConfigError("instance '" + name + "': per-variable arrays disagree with numVars");
    if (senses.size() != rhs.size())
      throw ConfigError("instance '" + name + "': senses/rhs length mismatch");
    const int m = numRows();
    for (const Triplet& t : triplets) {
      if (t.col < 0 || t.col >= numVars)
        throw ConfigError("instance '" + name + "': triplet column out of range");
      if (t.row < 0 || t.row >= m)
        throw ConfigError("instance '" + name + "': triplet row out of range");
    }
    for (int j = 0; j < numVars; ++j) {
      if (kinds[j] == VarKind::Binary) {
        bool ok = (lower[j] == 0.0 || lower[j] == 1.0) && (upper[j] == 0.0 || upper[j] == 1.0) &&
                  lower[j] <= upper[j];
        if (!ok)
          throw ConfigError("instance '" + name + "': binary variable x" + std::to_string(j) +
                            " has bounds outside {0,1}");
      } else if (std::isfinite(lower[j]) && std::isfinite(upper[j]) && lower[j] > upper[j]) {
        throw ConfigError("instance '" + name + "': crossed bounds on x" + std::to_string(j));
      }
    }
  }
};

/// Dense candidate solution.
struct Assignment {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// Values chosen for an index set P of binary variables.
struct PartialAssignment {
  std::vector<int> indices;    // distinct, ascending
  std::vector<double> values;  // 0 or 1, parallel to indices

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

inline void requireSameLength(const MilpInstance& inst, const Assignment& a) {
  if (static_cast<int>(a.size()) != inst.numVars)
    throw DimensionError("assignment length " + std::to_string(a.size()) +
                         " does not match instance with " + std::to_string(inst.numVars) +
                         " variables");
}

/// c . a as a plain left-to-right floating dot product.
inline double evaluateObjective(const MilpInstance& inst, const Assignment& a) {
  requireSameLength(inst, a);
  double acc = 0.0;
  for (int j = 0; j < inst.numVars; ++j) acc += inst.objective[j] * a.values[j];
  return acc;
}

struct FeasibilityReport {
  std::vector<double> rowViolations;    // per row, >= 0
  std::vector<double> boundViolations;  // per variable, >= 0
  std::vector<double> integralityViolations;  // per variable, >= 0 (0 for continuous)
  double maxViolation = 0.0;
  bool feasible = true;
};

/// Per-row / per-bound / per-integrality violation magnitudes. Feasible iff
/// every magnitude is <= tol.
inline FeasibilityReport checkFeasibility(const MilpInstance& inst, const Assignment& a,
                                          double tol = kDefaultFeasTol) {
  requireSameLength(inst, a);
  if (tol < 0) throw ConfigError("feasibility tolerance must be >= 0");
  FeasibilityReport rep;
  const int m = inst.numRows();
  std::vector<double> activity(static_cast<std::size_t>(m), 0.0);
  for (const Triplet& t : inst.triplets) activity[t.row] += t.value * a.values[t.col];

  rep.rowViolations.resize(m, 0.0);
  for (int r = 0; r < m; ++r) {
    double v = 0.0;
    switch (inst.senses[r]) {
      case RowSense::LessEqual: v = std::max(0.0, activity[r] - inst.rhs[r]); break;
      case RowSense::GreaterEqual: v = std::max(0.0, inst.rhs[r] - activity[r]); break;
      case RowSense::Equal: v = std::fabs(activity[r] - inst.rhs[r]); break;
    }
    rep.rowViolations[r] = v;
    rep.maxViolation = std::max(rep.maxViolation, v);
  }

  rep.boundViolations.resize(inst.numVars, 0.0);
  rep.integralityViolations.resize(inst.numVars, 0.0);
  for (int j = 0; j < inst.numVars; ++j) {
    double x = a.values[j];
    double bv = 0.0;
    if (std::isfinite(inst.lower[j])) bv = std::max(bv, inst.lower[j] - x);
    if (std::isfinite(inst.upper[j])) bv = std::max(bv, x - inst.upper[j]);
    rep.boundViolations[j] = bv;
    rep.maxViolation = std::max(rep.maxViolation, bv);
    if (inst.kinds[j] != VarKind::Continuous) {
      double iv = std::fabs(x - std::round(x));
      rep.integralityViolations[j] = iv;
      rep.maxViolation = std::max(rep.maxViolation, iv);
    }
  }
  rep.feasible = rep.maxViolation <= tol;
  return rep;
}

/// Bound-fixing reduction: each (i, v) in `pa` gets l_i = u_i = v. Variable
/// indices are preserved, so predictions and features stay aligned across
/// iterations. Re-fixing to the same value is a no-op; a different value is a
/// conflict.
inline MilpInstance fixVariables(const MilpInstance& inst, const PartialAssignment& pa) {
  MilpInstance out = inst;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    int j = pa.indices[k];
    double v = pa.values[k];
    if (j < 0 || j >= inst.numVars)
      throw DimensionError("fix index x" + std::to_string(j) + " out of range");
    if (inst.kinds[j] != VarKind::Binary)
      throw ConfigError("fix target x" + std::to_string(j) + " is not binary");
    if (v != 0.0 && v != 1.0)
      throw ConfigError("fix value for x" + std::to_string(j) + " must be 0 or 1");
    if (inst.isFixed(j) && inst.lower[j] != v)
      throw ConflictError("x" + std::to_string(j) + " already fixed to " +
                          std::to_string(inst.lower[j]) + ", cannot refix to " +
                          std::to_string(v));
    out.lower[j] = v;
    out.upper[j] = v;
  }
  return out;
}

/// Appends the row  c . x <= bound - epsilon  (strict improvement cut; strict
/// inequalities are not expressible in LP text, hence the epsilon margin).
inline MilpInstance addObjectiveCut(const MilpInstance& inst, double bound,
                                    double epsilon = -1.0) {
  if (epsilon < 0) epsilon = 1e-6 * std::max(1.0, std::fabs(bound));
  if (epsilon <= 0) throw ConfigError("objective cut epsilon must be > 0");
  MilpInstance out = inst;
  int row = out.numRows();
  for (int j = 0; j < inst.numVars; ++j)
    if (inst.objective[j] != 0.0) out.triplets.push_back({row, j, inst.objective[j]});
  out.senses.push_back(RowSense::LessEqual);
  out.rhs.push_back(bound - epsilon);
  return out;
}

/// Optional substitute-and-drop pass used only for reporting how far the
/// dimension shrank; the solving path keeps indices stable via bound-fixing.
struct EliminationResult {
  MilpInstance reduced;
  std::vector<int> keptToOriginal;  // reduced column -> original column
  double objectiveOffset = 0.0;     // c[fixed] . values, add back to objectives
};

inline EliminationResult eliminateFixed(const MilpInstance& inst) {
  EliminationResult res;
  std::vector<int> newIndex(inst.numVars, -1);
  for (int j = 0; j < inst.numVars; ++j) {
    if (!inst.isFixed(j)) {
      newIndex[j] = static_cast<int>(res.keptToOriginal.size());
      res.keptToOriginal.push_back(j);
    }
  }
  MilpInstance& out = res.reduced;
  out.name = inst.name;
  out.numVars = static_cast<int>(res.keptToOriginal.size());
  out.senses = inst.senses;
  out.rhs = inst.rhs;
  for (int j : res.keptToOriginal) {
    out.objective.push_back(inst.objective[j]);
    out.lower.push_back(inst.lower[j]);
    out.upper.push_back(inst.upper[j]);
    out.kinds.push_back(inst.kinds[j]);
  }
  for (const Triplet& t : inst.triplets) {
    if (newIndex[t.col] >= 0) {
      out.triplets.push_back({t.row, newIndex[t.col], t.value});
    } else {
      out.rhs[t.row] -= t.value * inst.lower[t.col];
    }
  }
  for (int j = 0; j < inst.numVars; ++j)
    if (inst.isFixed(j)) res.objectiveOffset += inst.objective[j] * inst.lower[j];
  return res;
}

}  // namespace apollo
