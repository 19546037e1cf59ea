#pragma once

// Weighted bipartite view of an instance: one node per variable, one per
// constraint, an edge wherever the matrix has a structural nonzero.
//
// Variable feature columns (fixed order):
//   0      objective coefficient / max(1, max_j |c_j|)
//   1      average coefficient over the variable's constraints (0 if isolated)
//   2      node degree / max variable degree (0 when the graph has no edges)
//   3      maximum coefficient (0 if isolated)
//   4      minimum coefficient (0 if isolated)
//   5      1 for integer-kind (binary or general integer), 0 for continuous
//   6..17  position embedding: 12-bit binary encoding of the variable index,
//          most significant bit first, wrapping modulo 4096
//   18     optional is-fixed flag (l == u), present only when requested
//
// Constraint feature columns:
//   0      average row coefficient (0 for an empty row)
//   1      row degree / max row degree
//   2      rhs / max(1, row L2 norm)
//   3      sense code (<=: 0, >=: 1, =: 2) min-max scaled over the rows
//          present in the instance (all-equal senses scale to 0)
//
// The single edge feature is the raw coefficient. Bound changes (fixing) do
// not touch any column except the optional is-fixed flag, so reduced problems
// featurize to the same graph as their parent apart from that flag.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/milp.hpp"

namespace apollo {

constexpr int kVarFeatureDim = 18;
constexpr int kConFeatureDim = 4;
constexpr int kPositionBits = 12;

struct GraphEdge {
  int con;
  int var;
  double coef;
};

struct BipartiteGraph {
  int numVars = 0;
  int numCons = 0;
  int varFeatDim = kVarFeatureDim;
  int conFeatDim = kConFeatureDim;
  std::vector<double> varFeatures;  // numVars x varFeatDim, row-major
  std::vector<double> conFeatures;  // numCons x conFeatDim, row-major
  std::vector<GraphEdge> edges;
  std::vector<std::uint8_t> binaryMask;  // prediction targets

  double varFeature(int var, int k) const {
    return varFeatures[static_cast<std::size_t>(var) * varFeatDim + k];
  }
  double conFeature(int con, int k) const {
    return conFeatures[static_cast<std::size_t>(con) * conFeatDim + k];
  }
};

struct FeaturizeOptions {
  bool fixedFlagColumn = false;  // append column 18 marking l == u
};

inline BipartiteGraph featurize(const MilpInstance& inst, const FeaturizeOptions& opts = {}) {
  BipartiteGraph g;
  g.numVars = inst.numVars;
  g.numCons = inst.numRows();
  g.varFeatDim = kVarFeatureDim + (opts.fixedFlagColumn ? 1 : 0);
  g.varFeatures.assign(static_cast<std::size_t>(g.numVars) * g.varFeatDim, 0.0);
  g.conFeatures.assign(static_cast<std::size_t>(g.numCons) * g.conFeatDim, 0.0);
  g.binaryMask.resize(static_cast<std::size_t>(g.numVars));
  for (int j = 0; j < g.numVars; ++j)
    g.binaryMask[j] = inst.kinds[j] == VarKind::Binary ? 1 : 0;

  g.edges.reserve(inst.triplets.size());
  for (const Triplet& t : inst.triplets) g.edges.push_back({t.row, t.col, t.value});

  std::vector<int> varDeg(g.numVars, 0), conDeg(g.numCons, 0);
  std::vector<double> varSum(g.numVars, 0.0), varMax(g.numVars, 0.0), varMin(g.numVars, 0.0);
  std::vector<double> conSum(g.numCons, 0.0), conNorm2(g.numCons, 0.0);
  for (const GraphEdge& e : g.edges) {
    if (varDeg[e.var] == 0) {
      varMax[e.var] = e.coef;
      varMin[e.var] = e.coef;
    } else {
      varMax[e.var] = std::max(varMax[e.var], e.coef);
      varMin[e.var] = std::min(varMin[e.var], e.coef);
    }
    ++varDeg[e.var];
    varSum[e.var] += e.coef;
    ++conDeg[e.con];
    conSum[e.con] += e.coef;
    conNorm2[e.con] += e.coef * e.coef;
  }
  int maxVarDeg = 0, maxConDeg = 0;
  for (int d : varDeg) maxVarDeg = std::max(maxVarDeg, d);
  for (int d : conDeg) maxConDeg = std::max(maxConDeg, d);

  double maxAbsObj = 0.0;
  for (double c : inst.objective) maxAbsObj = std::max(maxAbsObj, std::fabs(c));
  double objScale = std::max(1.0, maxAbsObj);

  for (int j = 0; j < g.numVars; ++j) {
    double* f = &g.varFeatures[static_cast<std::size_t>(j) * g.varFeatDim];
    f[0] = inst.objective[j] / objScale;
    f[1] = varDeg[j] > 0 ? varSum[j] / varDeg[j] : 0.0;
    f[2] = maxVarDeg > 0 ? static_cast<double>(varDeg[j]) / maxVarDeg : 0.0;
    f[3] = varMax[j];
    f[4] = varMin[j];
    f[5] = inst.kinds[j] == VarKind::Continuous ? 0.0 : 1.0;
    unsigned pos = static_cast<unsigned>(j) % (1u << kPositionBits);
    for (int b = 0; b < kPositionBits; ++b)
      f[6 + b] = (pos >> (kPositionBits - 1 - b)) & 1u ? 1.0 : 0.0;
    if (opts.fixedFlagColumn) f[kVarFeatureDim] = inst.isFixed(j) ? 1.0 : 0.0;
  }

  int minSense = 2, maxSense = 0;
  for (RowSense s : inst.senses) {
    minSense = std::min(minSense, static_cast<int>(s));
    maxSense = std::max(maxSense, static_cast<int>(s));
  }
  for (int r = 0; r < g.numCons; ++r) {
    double* f = &g.conFeatures[static_cast<std::size_t>(r) * g.conFeatDim];
    f[0] = conDeg[r] > 0 ? conSum[r] / conDeg[r] : 0.0;
    f[1] = maxConDeg > 0 ? static_cast<double>(conDeg[r]) / maxConDeg : 0.0;
    f[2] = inst.rhs[r] / std::max(1.0, std::sqrt(conNorm2[r]));
    int code = static_cast<int>(inst.senses[r]);
    f[3] = maxSense > minSense ? static_cast<double>(code - minSense) / (maxSense - minSense)
                               : 0.0;
  }
  return g;
}

/// Flat little-endian binary dump for offline inspection. Layout:
///   magic "APFB", u32 version=1,
///   u64 numVars, numCons, numEdges, varFeatDim, conFeatDim,
///   f64 varFeatures[numVars*varFeatDim]   (row-major)
///   f64 conFeatures[numCons*conFeatDim]
///   per edge: u64 con, u64 var, f64 coef
///   u8 binaryMask[numVars]
inline std::string dumpGraphBinary(const BipartiteGraph& g) {
  std::string out;
  auto putBytes = [&out](const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
  };
  auto putU64 = [&](std::uint64_t v) { putBytes(&v, 8); };
  auto putF64 = [&](double v) { putBytes(&v, 8); };
  out += "APFB";
  std::uint32_t version = 1;
  putBytes(&version, 4);
  putU64(static_cast<std::uint64_t>(g.numVars));
  putU64(static_cast<std::uint64_t>(g.numCons));
  putU64(g.edges.size());
  putU64(static_cast<std::uint64_t>(g.varFeatDim));
  putU64(static_cast<std::uint64_t>(g.conFeatDim));
  for (double v : g.varFeatures) putF64(v);
  for (double v : g.conFeatures) putF64(v);
  for (const GraphEdge& e : g.edges) {
    putU64(static_cast<std::uint64_t>(e.con));
    putU64(static_cast<std::uint64_t>(e.var));
    putF64(e.coef);
  }
  for (std::uint8_t m : g.binaryMask) out.push_back(static_cast<char>(m));
  return out;
}

}  // namespace apollo
