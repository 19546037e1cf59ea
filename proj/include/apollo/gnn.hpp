#pragma once

// Bipartite message-passing predictor with explicit reverse-mode gradients.
//
// Architecture (frozen; the hidden width and the sum aggregation are artifact
// choices, documented in the README):
//   - input projections lift variable (18 cols), constraint (4 cols) and edge
//     (coefficient) features to h-dimensional embeddings;
//   - each of the four layers runs two interleaved passes. The constraint
//     pass sends, along every edge, a linear message of the concatenated
//     (variable embedding, edge embedding), sum-aggregates incoming messages
//     per constraint, and applies a residual ReLU update on the concatenated
//     (old embedding, aggregate). The variable pass mirrors this in the other
//     direction;
//   - a linear head plus sigmoid yields one probability per binary variable.
//
// Model text files are versioned JSON with row-major coefficient arrays;
// doubles survive save/load bit-exactly, so reloaded models predict
// identically.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "apollo/bipartite_graph.hpp"
#include "apollo/errors.hpp"
#include "apollo/prediction.hpp"
#include "apollo/rng.hpp"
#include "apollo/solution_pool.hpp"

namespace apollo {

using Eigen::MatrixXd;

struct LinearLayer {
  MatrixXd W;  // (out, in)
  MatrixXd b;  // (out, 1)

  void init(int out, int in) {
    W = MatrixXd::Zero(out, in);
    b = MatrixXd::Zero(out, 1);
  }

  MatrixXd apply(const MatrixXd& x) const { return (W * x).colwise() + b.col(0); }
};

struct GnnModel {
  int hidden = 32;
  int varFeatDim = kVarFeatureDim;
  LinearLayer varProj, conProj, edgeProj;
  struct Pass {
    LinearLayer message;  // (2h -> h), input [neighbor embedding; edge embedding]
    LinearLayer update;   // (2h -> h), input [old embedding; aggregated messages]
  };
  struct Layer {
    Pass toCon;  // constraint-side update from incident variables
    Pass toVar;  // variable-side update from incident constraints
  };
  std::vector<Layer> layers;
  LinearLayer head;  // (h -> 1)

  static GnnModel zeros(int hidden = 32, int numLayers = 4, int varFeatDim = kVarFeatureDim) {
    GnnModel m;
    m.hidden = hidden;
    m.varFeatDim = varFeatDim;
    m.varProj.init(hidden, varFeatDim);
    m.conProj.init(hidden, kConFeatureDim);
    m.edgeProj.init(hidden, 1);
    m.layers.resize(numLayers);
    for (auto& layer : m.layers) {
      layer.toCon.message.init(hidden, 2 * hidden);
      layer.toCon.update.init(hidden, 2 * hidden);
      layer.toVar.message.init(hidden, 2 * hidden);
      layer.toVar.update.init(hidden, 2 * hidden);
    }
    m.head.init(1, hidden);
    return m;
  }

  /// Visits every parameter matrix in a fixed order.
  template <typename Fn>
  void forEachParam(Fn&& fn) {
    auto lin = [&fn](const std::string& name, LinearLayer& l) {
      fn(name + ".W", l.W);
      fn(name + ".b", l.b);
    };
    lin("varProj", varProj);
    lin("conProj", conProj);
    lin("edgeProj", edgeProj);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      std::string p = "layer" + std::to_string(i);
      lin(p + ".toCon.message", layers[i].toCon.message);
      lin(p + ".toCon.update", layers[i].toCon.update);
      lin(p + ".toVar.message", layers[i].toVar.message);
      lin(p + ".toVar.update", layers[i].toVar.update);
    }
    lin("head", head);
  }

  template <typename Fn>
  void forEachParam(Fn&& fn) const {
    const_cast<GnnModel*>(this)->forEachParam(
        [&fn](const std::string& name, MatrixXd& m) { fn(name, const_cast<const MatrixXd&>(m)); });
  }
};

/// Same shape as the model; holds d(loss)/d(parameter).
using GnnGradients = GnnModel;

/// Damped Glorot-uniform init. The damping keeps sum-aggregated messages from
/// saturating the sigmoid on high-degree graphs (there is no normalization
/// layer to absorb the node degree).
inline GnnModel xavierInit(int hidden, int numLayers, int varFeatDim, std::uint64_t seed,
                           double scale = 0.25) {
  GnnModel m = GnnModel::zeros(hidden, numLayers, varFeatDim);
  Rng rng(seed);
  m.forEachParam([&rng, scale](const std::string& name, MatrixXd& p) {
    if (name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0) return;  // biases stay 0
    double limit = scale * std::sqrt(6.0 / (p.rows() + p.cols()));
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (Eigen::Index c = 0; c < p.cols(); ++c) p(r, c) = uniformReal(rng, -limit, limit);
  });
  return m;
}

inline double stableSigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

/// All forward intermediates; kept so the backward pass can mirror the
/// computation exactly.
struct GnnTrace {
  MatrixXd Xv, Xc;            // inputs, one column per node
  Eigen::VectorXd coef;       // edge coefficients
  std::vector<int> conIdx, varIdx;
  std::vector<int> binCols;   // variable columns carrying predictions
  MatrixXd E, V0, C0;
  struct LayerTrace {
    MatrixXd Vin, Cin;
    MatrixXd Min1, Uin1, Upre1, Cmid;
    MatrixXd Min2, Uin2, Upre2;
  };
  std::vector<LayerTrace> layers;
  MatrixXd Vfinal;
  Eigen::VectorXd logits;  // per binary variable
  Eigen::VectorXd probs;   // sigmoid(logits)
};

inline GnnTrace gnnForwardTrace(const GnnModel& model, const BipartiteGraph& g) {
  if (g.varFeatDim != model.varFeatDim)
    throw DimensionError("gnn: graph has " + std::to_string(g.varFeatDim) +
                         " variable features, model expects " + std::to_string(model.varFeatDim));
  const int h = model.hidden;
  const int n = g.numVars;
  const int m = g.numCons;
  const int nE = static_cast<int>(g.edges.size());

  GnnTrace t;
  t.Xv.resize(g.varFeatDim, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < g.varFeatDim; ++k) t.Xv(k, j) = g.varFeature(j, k);
  t.Xc.resize(kConFeatureDim, m);
  for (int r = 0; r < m; ++r)
    for (int k = 0; k < kConFeatureDim; ++k) t.Xc(k, r) = g.conFeature(r, k);
  t.coef.resize(nE);
  t.conIdx.resize(nE);
  t.varIdx.resize(nE);
  for (int e = 0; e < nE; ++e) {
    t.coef(e) = g.edges[e].coef;
    t.conIdx[e] = g.edges[e].con;
    t.varIdx[e] = g.edges[e].var;
  }
  for (int j = 0; j < n; ++j)
    if (g.binaryMask[j]) t.binCols.push_back(j);

  t.V0 = n > 0 ? MatrixXd((model.varProj.W * t.Xv).colwise() + model.varProj.b.col(0))
               : MatrixXd(h, 0);
  t.C0 = m > 0 ? MatrixXd((model.conProj.W * t.Xc).colwise() + model.conProj.b.col(0))
               : MatrixXd(h, 0);
  t.E = nE > 0
            ? MatrixXd((model.edgeProj.W * t.coef.transpose()).colwise() + model.edgeProj.b.col(0))
            : MatrixXd(h, 0);

  MatrixXd V = t.V0, C = t.C0;
  t.layers.resize(model.layers.size());
  for (std::size_t L = 0; L < model.layers.size(); ++L) {
    auto& lt = t.layers[L];
    const auto& layer = model.layers[L];
    lt.Vin = V;
    lt.Cin = C;

    // constraint-side pass
    lt.Min1.resize(2 * h, nE);
    for (int e = 0; e < nE; ++e) {
      lt.Min1.col(e).head(h) = V.col(t.varIdx[e]);
      lt.Min1.col(e).tail(h) = t.E.col(e);
    }
    MatrixXd M1 = nE > 0 ? MatrixXd((layer.toCon.message.W * lt.Min1).colwise() +
                                    layer.toCon.message.b.col(0))
                         : MatrixXd(h, 0);
    MatrixXd aggC = MatrixXd::Zero(h, m);
    for (int e = 0; e < nE; ++e) aggC.col(t.conIdx[e]) += M1.col(e);
    lt.Uin1.resize(2 * h, m);
    lt.Uin1.topRows(h) = C;
    lt.Uin1.bottomRows(h) = aggC;
    lt.Upre1 = m > 0 ? MatrixXd((layer.toCon.update.W * lt.Uin1).colwise() +
                                layer.toCon.update.b.col(0))
                     : MatrixXd(h, 0);
    C = C + lt.Upre1.cwiseMax(0.0);
    lt.Cmid = C;

    // variable-side pass
    lt.Min2.resize(2 * h, nE);
    for (int e = 0; e < nE; ++e) {
      lt.Min2.col(e).head(h) = C.col(t.conIdx[e]);
      lt.Min2.col(e).tail(h) = t.E.col(e);
    }
    MatrixXd M2 = nE > 0 ? MatrixXd((layer.toVar.message.W * lt.Min2).colwise() +
                                    layer.toVar.message.b.col(0))
                         : MatrixXd(h, 0);
    MatrixXd aggV = MatrixXd::Zero(h, n);
    for (int e = 0; e < nE; ++e) aggV.col(t.varIdx[e]) += M2.col(e);
    lt.Uin2.resize(2 * h, n);
    lt.Uin2.topRows(h) = V;
    lt.Uin2.bottomRows(h) = aggV;
    lt.Upre2 = n > 0 ? MatrixXd((layer.toVar.update.W * lt.Uin2).colwise() +
                                layer.toVar.update.b.col(0))
                     : MatrixXd(h, 0);
    V = V + lt.Upre2.cwiseMax(0.0);
  }
  t.Vfinal = V;

  t.logits.resize(static_cast<Eigen::Index>(t.binCols.size()));
  t.probs.resize(t.logits.size());
  for (std::size_t k = 0; k < t.binCols.size(); ++k) {
    double z = (model.head.W * V.col(t.binCols[k]))(0, 0) + model.head.b(0, 0);
    t.logits(static_cast<Eigen::Index>(k)) = z;
    t.probs(static_cast<Eigen::Index>(k)) = stableSigmoid(z);
  }
  return t;
}

/// Public marginals are clamped into [1e-7, 1-1e-7]; the raw sigmoid stays in
/// the trace for the backward pass.
inline MarginalPrediction marginalsFromTrace(const GnnTrace& t) {
  MarginalPrediction pred;
  pred.probs.reserve(static_cast<std::size_t>(t.probs.size()));
  for (Eigen::Index i = 0; i < t.probs.size(); ++i) pred.probs.push_back(clampProb(t.probs(i)));
  return pred;
}

inline MarginalPrediction gnnForward(const GnnModel& model, const BipartiteGraph& g) {
  return marginalsFromTrace(gnnForwardTrace(model, g));
}

/// Cross-entropy of one instance: sum over binary variables of
/// -(p log q + (1-p) log(1-q)) with q the clamped prediction.
inline double gnnLossInstance(const MarginalPrediction& pred, const ProbTarget& target) {
  if (pred.size() != target.values.size())
    throw DimensionError("gnnLoss: prediction/target length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double q = clampProb(pred.probs[i]);
    double p = target.values[i];
    loss -= p * std::log(q) + (1.0 - p) * std::log(1.0 - q);
  }
  return loss;
}

/// Batch loss: mean over instances of the per-instance sums.
inline double gnnLoss(const std::vector<MarginalPrediction>& preds,
                      const std::vector<ProbTarget>& targets) {
  if (preds.size() != targets.size() || preds.empty())
    throw DimensionError("gnnLoss: batch size mismatch or empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) total += gnnLossInstance(preds[i], targets[i]);
  return total / static_cast<double>(preds.size());
}

/// Exact reverse-mode gradient of gnnLossInstance(gnnForward(model,g), target)
/// with respect to every model parameter.
inline GnnGradients gnnBackward(const GnnModel& model, const BipartiteGraph& g,
                                const ProbTarget& target, const GnnTrace* forwardTrace = nullptr) {
  GnnTrace local;
  const GnnTrace& t = forwardTrace ? *forwardTrace : (local = gnnForwardTrace(model, g), local);
  if (t.binCols.size() != target.values.size())
    throw DimensionError("gnnBackward: target length mismatch");

  const int h = model.hidden;
  const int n = g.numVars;
  const int m = g.numCons;
  const int nE = static_cast<int>(g.edges.size());
  GnnGradients grad = GnnModel::zeros(h, static_cast<int>(model.layers.size()), model.varFeatDim);

  MatrixXd dV = MatrixXd::Zero(h, n);
  MatrixXd dC = MatrixXd::Zero(h, m);
  MatrixXd dE = MatrixXd::Zero(h, nE);

  // head and loss: d/dz of BCE(clamp(sigmoid(z)), p)
  for (std::size_t k = 0; k < t.binCols.size(); ++k) {
    double s = t.probs(static_cast<Eigen::Index>(k));
    double q = clampProb(s);
    double p = target.values[k];
    double dLdq = (q - p) / (q * (1.0 - q));
    double clampPass = (s > kProbClamp && s < 1.0 - kProbClamp) ? 1.0 : 0.0;
    double dz = dLdq * clampPass * s * (1.0 - s);
    int j = t.binCols[k];
    grad.head.W += dz * t.Vfinal.col(j).transpose();
    grad.head.b(0, 0) += dz;
    dV.col(j) += dz * model.head.W.transpose().col(0);
  }

  for (int L = static_cast<int>(model.layers.size()) - 1; L >= 0; --L) {
    const auto& lt = t.layers[L];
    const auto& layer = model.layers[L];
    auto& glayer = grad.layers[L];

    // variable-side pass backward: V_out = V_in + relu(W_u [V_in; aggV] + b)
    MatrixXd dUpre2 = dV.cwiseProduct((lt.Upre2.array() > 0.0).cast<double>().matrix());
    if (n > 0) {
      glayer.toVar.update.W += dUpre2 * lt.Uin2.transpose();
      glayer.toVar.update.b += dUpre2.rowwise().sum();
    }
    MatrixXd dUin2 = layer.toVar.update.W.transpose() * dUpre2;
    MatrixXd dVprev = dV + dUin2.topRows(h);
    MatrixXd dAggV = dUin2.bottomRows(h);
    if (nE > 0) {
      MatrixXd dM2(h, nE);
      for (int e = 0; e < nE; ++e) dM2.col(e) = dAggV.col(t.varIdx[e]);
      glayer.toVar.message.W += dM2 * lt.Min2.transpose();
      glayer.toVar.message.b += dM2.rowwise().sum();
      MatrixXd dMin2 = layer.toVar.message.W.transpose() * dM2;
      for (int e = 0; e < nE; ++e) {
        dC.col(t.conIdx[e]) += dMin2.col(e).head(h);
        dE.col(e) += dMin2.col(e).tail(h);
      }
    }
    dV = dVprev;

    // constraint-side pass backward: C_mid = C_in + relu(W_u [C_in; aggC] + b)
    MatrixXd dUpre1 = dC.cwiseProduct((lt.Upre1.array() > 0.0).cast<double>().matrix());
    if (m > 0) {
      glayer.toCon.update.W += dUpre1 * lt.Uin1.transpose();
      glayer.toCon.update.b += dUpre1.rowwise().sum();
    }
    MatrixXd dUin1 = layer.toCon.update.W.transpose() * dUpre1;
    MatrixXd dCprev = dC + dUin1.topRows(h);
    MatrixXd dAggC = dUin1.bottomRows(h);
    if (nE > 0) {
      MatrixXd dM1(h, nE);
      for (int e = 0; e < nE; ++e) dM1.col(e) = dAggC.col(t.conIdx[e]);
      glayer.toCon.message.W += dM1 * lt.Min1.transpose();
      glayer.toCon.message.b += dM1.rowwise().sum();
      MatrixXd dMin1 = layer.toCon.message.W.transpose() * dM1;
      for (int e = 0; e < nE; ++e) {
        dV.col(t.varIdx[e]) += dMin1.col(e).head(h);
        dE.col(e) += dMin1.col(e).tail(h);
      }
    }
    dC = dCprev;
  }

  if (n > 0) {
    grad.varProj.W += dV * t.Xv.transpose();
    grad.varProj.b += dV.rowwise().sum();
  }
  if (m > 0) {
    grad.conProj.W += dC * t.Xc.transpose();
    grad.conProj.b += dC.rowwise().sum();
  }
  if (nE > 0) {
    grad.edgeProj.W += dE * t.coef;
    grad.edgeProj.b += dE.rowwise().sum();
  }
  return grad;
}

// ---------------------------------------------------------------------------
// model serialization (versioned JSON text)
// ---------------------------------------------------------------------------

inline nlohmann::json matrixToJson(const MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline MatrixXd matrixFromJson(const nlohmann::json& j) {
  MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows() * m.cols())
    throw ConfigError("model: matrix data length mismatch");
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[i++].get<double>();
  return m;
}

inline std::string modelToText(const GnnModel& model) {
  nlohmann::json j;
  j["format"] = "apollo-gnn";
  j["version"] = 1;
  j["hidden"] = model.hidden;
  j["varFeatDim"] = model.varFeatDim;
  j["layers"] = model.layers.size();
  nlohmann::json params;
  model.forEachParam(
      [&params](const std::string& name, const MatrixXd& p) { params[name] = matrixToJson(p); });
  j["params"] = std::move(params);
  return j.dump();
}

inline GnnModel modelFromText(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format") != "apollo-gnn" || j.at("version") != 1)
    throw ConfigError("model: unsupported format or version");
  GnnModel model = GnnModel::zeros(j.at("hidden").get<int>(), j.at("layers").get<int>(),
                                   j.at("varFeatDim").get<int>());
  const auto& params = j.at("params");
  model.forEachParam([&params](const std::string& name, MatrixXd& p) {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigError("model: missing parameter " + name);
    MatrixXd loaded = matrixFromJson(*it);
    if (loaded.rows() != p.rows() || loaded.cols() != p.cols())
      throw ConfigError("model: shape mismatch for " + name);
    p = std::move(loaded);
  });
  return model;
}

/// Featurize-and-forward wrapper satisfying the Predictor interface.
inline Predictor makeModelPredictor(GnnModel model, FeaturizeOptions opts = {}) {
  return [model = std::move(model), opts](const MilpInstance& inst, int) {
    return gnnForward(model, featurize(inst, opts));
  };
}

}  // namespace apollo
