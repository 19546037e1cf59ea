#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "apollo/bipartite_graph.hpp"
#include "apollo/errors.hpp"
#include "apollo/gnn.hpp"
#include "apollo/milp.hpp"
#include "apollo/rng.hpp"
#include "apollo/solution_pool.hpp"

namespace apollo {

struct TrainSample {
  MilpInstance instance;
  BipartiteGraph graph;
  ProbTarget target;
};

inline TrainSample makeTrainSample(MilpInstance inst, const SolutionPool& pool,
                                   const FeaturizeOptions& opts = {}) {
  TrainSample s;
  s.graph = featurize(inst, opts);
  s.target = poolTargets(inst, pool);
  s.instance = std::move(inst);
  return s;
}

struct TrainConfig {
  int epochs = 10000;
  double learningRate = 1e-3;
  int patience = 50;      // validation evaluations without improvement
  int evalInterval = 1;   // epochs between validation evaluations
  int hidden = 32;
  int numLayers = 4;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adamEps = 1e-8;
  // called as (epoch, trainLoss, valLoss) after each evaluation
  std::function<void(int, double, double)> progress;
};

namespace detail {

/// forEachParam visits in a fixed order, so zipping models by position is safe.
inline std::vector<MatrixXd*> paramList(GnnModel& model) {
  std::vector<MatrixXd*> out;
  model.forEachParam([&out](const std::string&, MatrixXd& p) { out.push_back(&p); });
  return out;
}

struct AdamState {
  GnnModel m, v;
  long long step = 0;
};

inline void adamUpdate(GnnModel& model, GnnGradients& grad, AdamState& state,
                       const TrainConfig& cfg) {
  ++state.step;
  double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto params = paramList(model);
  auto grads = paramList(grad);
  auto m1 = paramList(state.m);
  auto m2 = paramList(state.v);
  for (std::size_t i = 0; i < params.size(); ++i) {
    *m1[i] = cfg.beta1 * *m1[i] + (1.0 - cfg.beta1) * *grads[i];
    *m2[i] = cfg.beta2 * *m2[i] + (1.0 - cfg.beta2) * grads[i]->cwiseProduct(*grads[i]);
    MatrixXd mhat = *m1[i] / correction1;
    MatrixXd vhat = *m2[i] / correction2;
    *params[i] -=
        cfg.learningRate * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + cfg.adamEps).matrix());
  }
}

}  // namespace detail

inline double datasetLoss(const GnnModel& model, const std::vector<TrainSample>& samples) {
  std::vector<MarginalPrediction> preds;
  std::vector<ProbTarget> targets;
  preds.reserve(samples.size());
  targets.reserve(samples.size());
  for (const TrainSample& s : samples) {
    preds.push_back(gnnForward(model, s.graph));
    targets.push_back(s.target);
  }
  return gnnLoss(preds, targets);
}

/// Full-batch Adam on the batch cross-entropy, returning the parameters with
/// the best validation loss seen (the untrained model counts as the first
/// checkpoint). Deterministic for a fixed config and seed. Throws
/// IntegrityError when the loss turns NaN.
inline GnnModel train(const std::vector<TrainSample>& trainSet,
                      const std::vector<TrainSample>& valSet, const TrainConfig& cfg = {}) {
  if (trainSet.empty()) throw ConfigError("train: empty training set");
  const std::vector<TrainSample>& validation = valSet.empty() ? trainSet : valSet;
  const int varFeatDim = trainSet.front().graph.varFeatDim;

  GnnModel model = xavierInit(cfg.hidden, cfg.numLayers, varFeatDim, cfg.seed);
  detail::AdamState adam{GnnModel::zeros(cfg.hidden, cfg.numLayers, varFeatDim),
                         GnnModel::zeros(cfg.hidden, cfg.numLayers, varFeatDim), 0};

  GnnModel best = model;
  double bestVal = datasetLoss(model, validation);
  int evalsSinceImprovement = 0;
  const double scale = 1.0 / static_cast<double>(trainSet.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    GnnGradients grad = GnnModel::zeros(cfg.hidden, cfg.numLayers, varFeatDim);
    auto gradSlots = detail::paramList(grad);
    double trainLoss = 0.0;
    for (const TrainSample& s : trainSet) {
      GnnTrace trace = gnnForwardTrace(model, s.graph);
      trainLoss += gnnLossInstance(marginalsFromTrace(trace), s.target);
      GnnGradients g = gnnBackward(model, s.graph, s.target, &trace);
      auto sampleSlots = detail::paramList(g);
      for (std::size_t i = 0; i < gradSlots.size(); ++i)
        *gradSlots[i] += scale * *sampleSlots[i];
    }
    trainLoss *= scale;
    if (std::isnan(trainLoss))
      throw IntegrityError("train: loss diverged to NaN at epoch " + std::to_string(epoch));
    detail::adamUpdate(model, grad, adam, cfg);

    if (epoch % cfg.evalInterval == 0) {
      double valLoss = datasetLoss(model, validation);
      if (std::isnan(valLoss))
        throw IntegrityError("train: validation loss is NaN at epoch " + std::to_string(epoch));
      if (cfg.progress) cfg.progress(epoch, trainLoss, valLoss);
      if (valLoss < bestVal) {
        bestVal = valLoss;
        best = model;
        evalsSinceImprovement = 0;
      } else if (++evalsSinceImprovement >= cfg.patience) {
        break;
      }
    }
  }
  return best;
}

/// Reduced training instances for distribution alignment: each output draws a
/// fixing ratio alpha uniformly from [lo, hi], picks floor(alpha * nBinary)
/// distinct binary variables uniformly, and bound-fixes them to the pool's
/// best solution values.
inline std::vector<MilpInstance> augment(const MilpInstance& inst, const SolutionPool& pool,
                                         Rng& rng, int count = 5, double lo = 0.3,
                                         double hi = 0.7) {
  if (pool.empty()) throw ConfigError("augment: empty solution pool");
  const Assignment& bestSol = pool.best().assignment;
  std::vector<int> binIdx = inst.binaryIndices();
  std::vector<MilpInstance> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double alpha = uniformReal(rng, lo, hi);
    int nFix = static_cast<int>(std::floor(alpha * static_cast<double>(binIdx.size())));
    std::vector<int> perm = binIdx;
    for (int t = 0; t < nFix; ++t) {
      std::size_t r = static_cast<std::size_t>(t) + uniformIndex(rng, perm.size() - t);
      std::swap(perm[t], perm[r]);
    }
    PartialAssignment pa;
    pa.indices.assign(perm.begin(), perm.begin() + nFix);
    std::sort(pa.indices.begin(), pa.indices.end());
    for (int j : pa.indices) pa.values.push_back(std::round(bestSol[j]));
    MilpInstance reduced = fixVariables(inst, pa);
    reduced.name = inst.name + "-aug" + std::to_string(k);
    out.push_back(std::move(reduced));
  }
  return out;
}

/// Pool for a reduced instance when no backend is available to re-collect:
/// keeps the parent members that agree with the fixing. The best solution
/// used for fixing always survives, so the result is never empty.
inline SolutionPool filterPoolForReduced(const MilpInstance& reduced, const SolutionPool& parent,
                                         double tol = kDefaultFeasTol) {
  SolutionPool out;
  out.capacity = parent.capacity;
  for (const auto& e : parent.entries) {
    bool consistent = true;
    for (int j = 0; j < reduced.numVars && consistent; ++j)
      if (reduced.isFixed(j) && std::fabs(e.assignment[j] - reduced.lower[j]) > tol)
        consistent = false;
    if (consistent) out.insert(e.assignment, e.objective);
  }
  return out;
}

}  // namespace apollo
