#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/milp.hpp"
#include "apollo/rng.hpp"

namespace apollo {

constexpr double kProbClamp = 1e-7;

/// Probabilities are clamped into [1e-7, 1-1e-7] before entering any
/// logarithm so deterministic targets and saturated predictions stay finite.
inline double clampProb(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

/// Marginal probability that each binary variable takes value 1, ordered by
/// ascending variable index over the instance's binary variables.
struct MarginalPrediction {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

/// Anything that maps the current (possibly reduced) instance to marginals.
/// The iteration index lets stochastic predictors redraw per round while
/// staying reproducible.
using Predictor = std::function<MarginalPrediction(const MilpInstance&, int iteration)>;

/// Controlled-accuracy predictor: per binary variable, with probability
/// 1-eps the marginal points at the optimal value with confidence `conf`,
/// otherwise at the wrong value. eps=0, conf=1 reproduces the optimum.
inline MarginalPrediction oraclePredict(const MilpInstance& inst, const Assignment& optimal,
                                        double eps, double conf, Rng& rng) {
  if (eps < 0.0 || eps >= 0.5) throw ConfigError("oraclePredict: eps must be in [0, 0.5)");
  if (conf <= 0.5 || conf > 1.0) throw ConfigError("oraclePredict: conf must be in (0.5, 1]");
  requireSameLength(inst, optimal);
  MarginalPrediction pred;
  for (int j = 0; j < inst.numVars; ++j) {
    if (inst.kinds[j] != VarKind::Binary) continue;
    bool optOne = std::round(optimal[j]) == 1.0;
    bool correct = !bernoulli(rng, eps);
    bool towardOne = optOne == correct;
    pred.probs.push_back(towardOne ? conf : 1.0 - conf);
  }
  return pred;
}

inline Predictor makeOraclePredictor(Assignment optimal, double eps, double conf,
                                     std::uint64_t baseSeed) {
  return [optimal = std::move(optimal), eps, conf, baseSeed](const MilpInstance& inst,
                                                             int iteration) {
    Rng rng(deriveSeed(baseSeed, static_cast<std::uint64_t>(iteration)));
    return oraclePredict(inst, optimal, eps, conf, rng);
  };
}

}  // namespace apollo
