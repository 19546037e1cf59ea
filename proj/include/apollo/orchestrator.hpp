#pragma once

// Alternating prediction-correction driver. Each iteration predicts marginals
// on the current reduced instance, selects a partial solution, solves the
// trust-region search problem within the iteration budget, and (except in the
// final exploitation round) fixes the chosen subset before handing the
// reduced instance to the next iteration:
//
//   strategy consistency: fix where prediction and reference agree
//   strategy direct:      fix all of P at the reference values
//   strategy predicted:   fix all of P at the predicted values
//
// Failure handling per iteration: if the trust-region problem yields no
// incumbent, retry once with the cut removed (when one was added), then once
// with a doubled radius; after that the iteration fixes nothing and the
// unreduced instance moves forward. The run aborts only when the very first
// iteration proves the instance itself infeasible.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "apollo/backend.hpp"
#include "apollo/errors.hpp"
#include "apollo/lp_format.hpp"
#include "apollo/milp.hpp"
#include "apollo/prediction.hpp"
#include "apollo/rng.hpp"
#include "apollo/trust_region.hpp"
#include "apollo/uebo.hpp"

namespace apollo {

struct IterationPlan {
  int k0 = 0;
  int k1 = 0;
  int delta = 0;
  double timeBudgetSec = 60.0;
};

struct Schedule {
  std::vector<IterationPlan> iterations;

  int totalFix() const {
    int s = 0;
    for (const auto& it : iterations) s += it.k0 + it.k1;
    return s;
  }

  void validate(int numBinary) const {
    if (iterations.empty()) throw ConfigError("schedule: needs at least one iteration");
    for (const auto& it : iterations) {
      TrustRegionSpec{it.k0, it.k1, it.delta}.validate();
      if (it.timeBudgetSec <= 0) throw ConfigError("schedule: budgets must be > 0");
    }
    if (totalFix() > numBinary)
      throw ConfigError("schedule: cumulative k0+k1 = " + std::to_string(totalFix()) +
                        " exceeds the " + std::to_string(numBinary) + " binary variables");
  }
};

/// Four rounds shaped like the reference hyperparameters, scaled to the
/// instance size: partial-solution fractions 4/15, 2/15, 1/15, 0.5/15 of the
/// binary count (all fixed toward 0), radii at 15% of each round's size, and
/// budgets split 10/10/20/60.
inline Schedule defaultSchedule(int numBinary, double totalBudgetSec = 60.0) {
  const double kFrac[4] = {400.0 / 1500, 200.0 / 1500, 100.0 / 1500, 50.0 / 1500};
  const double dFrac[4] = {60.0 / 1500, 30.0 / 1500, 15.0 / 1500, 10.0 / 1500};
  const double budget[4] = {0.1, 0.1, 0.2, 0.6};
  Schedule s;
  for (int i = 0; i < 4; ++i) {
    IterationPlan p;
    p.k0 = static_cast<int>(std::floor(kFrac[i] * numBinary));
    p.k1 = 0;
    // keep at least one flip allowed whenever anything is fixed, so the
    // search can actually correct at small instance sizes
    int radius = static_cast<int>(std::lround(dFrac[i] * numBinary));
    p.delta = p.k0 > 0 ? std::min(p.k0, std::max(1, radius)) : 0;
    p.timeBudgetSec = std::max(0.1, budget[i] * totalBudgetSec);
    s.iterations.push_back(p);
  }
  return s;
}

struct IterationRecord {
  int index = 0;
  SolveStatus status = SolveStatus::TimeoutNoIncumbent;
  std::optional<double> referenceObjective;
  int selectedCount = 0;    // |P|
  int fixedCount = 0;       // |P'|
  int cumulativeFixed = 0;  // sum of fixedCount so far
  double consistentFraction = 0.0;
  double elapsedSec = 0.0;
};

enum class FixStrategy { Consistency, Direct, Predicted };

inline const char* toString(FixStrategy s) {
  switch (s) {
    case FixStrategy::Consistency: return "consistency";
    case FixStrategy::Direct: return "direct";
    case FixStrategy::Predicted: return "predicted";
  }
  return "?";
}

struct RunOptions {
  FixStrategy strategy = FixStrategy::Consistency;
  bool objectiveCut = false;  // strict-improvement cut on reduced problems
  double cutEpsilon = -1.0;   // <0: scaled default
};

struct RunRecord {
  std::string instanceName;
  std::string status = "ok";  // ok | infeasible | no-incumbent
  std::vector<IterationRecord> iterations;
  std::optional<Assignment> best;
  std::optional<double> objective;
  std::optional<double> gapAbs;
  std::optional<double> gapRel;
  /// (scheduled backend seconds, best objective so far). The time axis counts
  /// the budgets of completed iterations, not wall clock, so repeated runs
  /// with one seed produce identical artifacts. Wall time is in elapsedSec.
  std::vector<std::pair<double, double>> trajectory;
  double elapsedSec = 0.0;
};

/// gap_abs = |obj - bks|; gap_rel = |obj - bks| / |bks|, absent when bks = 0.
inline std::pair<double, std::optional<double>> computeGaps(double obj, double bks) {
  if (!std::isfinite(bks)) throw ConfigError("computeGaps: BKS must be finite");
  double gapAbs = std::fabs(obj - bks);
  std::optional<double> gapRel;
  if (bks != 0.0) gapRel = gapAbs / std::fabs(bks);
  return {gapAbs, gapRel};
}

inline RunRecord runApollo(const MilpInstance& original, const Predictor& predictor,
                           const Schedule& schedule, const BackendConfig& backendCfg,
                           const RunOptions& opts = {}) {
  schedule.validate(original.numBinary());
  auto tStart = std::chrono::steady_clock::now();
  auto now = [&tStart]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - tStart).count();
  };

  RunRecord rec;
  rec.instanceName = original.name;
  MilpInstance cur = original;
  std::optional<double> bestObj;
  std::optional<Assignment> bestSol;
  int cumulativeFixed = 0;
  double schedTime = 0.0;  // budgets of completed iterations

  auto registerIncumbent = [&](const Assignment& a, double atSchedTime) {
    if (!checkFeasibility(original, a, backendCfg.feasTol).feasible)
      throw IntegrityError("runApollo: incumbent infeasible for the original instance");
    double obj = evaluateObjective(original, a);
    if (!bestObj || obj < *bestObj) {
      bestObj = obj;
      bestSol = a;
      rec.trajectory.emplace_back(atSchedTime, obj);
    }
  };

  const int K = static_cast<int>(schedule.iterations.size());
  for (int iter = 0; iter < K; ++iter) {
    const IterationPlan& plan = schedule.iterations[iter];
    double iterStart = now();
    IterationRecord irec;
    irec.index = iter;

    MarginalPrediction marginals = predictor(cur, iter);
    PartialAssignment partial =
        selectPartial(cur, marginals, TrustRegionSpec{plan.k0, plan.k1, plan.delta});
    irec.selectedCount = static_cast<int>(partial.size());

    BackendConfig solveCfg = backendCfg;
    solveCfg.timeLimitSec = plan.timeBudgetSec;
    solveCfg.poolSize = 0;

    // fallback ladder: cut -> no cut -> doubled radius
    SolveResult res;
    bool cutApplied = opts.objectiveCut && bestObj.has_value();
    {
      MilpInstance trProblem = buildTrustRegion(cur, partial, plan.delta);
      if (cutApplied) {
        res = solve(addObjectiveCut(trProblem, *bestObj, opts.cutEpsilon), solveCfg);
        if (!res.hasIncumbent()) res = solve(trProblem, solveCfg);
      } else {
        res = solve(trProblem, solveCfg);
      }
      if (!res.hasIncumbent())
        res = solve(buildTrustRegion(cur, partial, 2 * plan.delta), solveCfg);
    }

    schedTime += plan.timeBudgetSec;
    irec.status = res.status;
    if (!res.hasIncumbent()) {
      if (iter == 0) {
        SolveResult probe = solve(cur, solveCfg);
        if (probe.status == SolveStatus::Infeasible) {
          rec.status = "infeasible";
          irec.elapsedSec = now() - iterStart;
          rec.iterations.push_back(irec);
          break;
        }
        if (probe.hasIncumbent()) registerIncumbent(*probe.incumbent, schedTime);
      }
      // pass the unreduced problem forward
      irec.cumulativeFixed = cumulativeFixed;
      irec.elapsedSec = now() - iterStart;
      rec.iterations.push_back(irec);
      continue;
    }

    const Assignment& reference = *res.incumbent;
    registerIncumbent(reference, schedTime);
    irec.referenceObjective = evaluateObjective(original, reference);

    PartialAssignment consistent = fixConsistent(partial, reference);
    irec.consistentFraction =
        partial.empty() ? 0.0
                        : static_cast<double>(consistent.size()) / static_cast<double>(partial.size());

    if (iter + 1 < K) {
      PartialAssignment toFix;
      switch (opts.strategy) {
        case FixStrategy::Consistency: toFix = consistent; break;
        case FixStrategy::Direct: toFix = fixDirect(reference, partial.indices); break;
        case FixStrategy::Predicted: toFix = fixPredicted(partial); break;
      }
      irec.fixedCount = static_cast<int>(toFix.size());
      cumulativeFixed += irec.fixedCount;
      cur = fixVariables(cur, toFix);
    }
    irec.cumulativeFixed = cumulativeFixed;
    irec.elapsedSec = now() - iterStart;
    rec.iterations.push_back(irec);
  }

  if (bestSol) {
    rec.best = bestSol;
    rec.objective = bestObj;
    if (rec.status == "ok" && rec.iterations.empty()) rec.status = "no-incumbent";
  } else if (rec.status == "ok") {
    rec.status = "no-incumbent";
  }
  rec.elapsedSec = now();
  return rec;
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

enum class ExperimentStrategy { Apollo, DirectFix, MultiPS, BaselineSolver };

inline const char* toString(ExperimentStrategy s) {
  switch (s) {
    case ExperimentStrategy::Apollo: return "apollo";
    case ExperimentStrategy::DirectFix: return "direct";
    case ExperimentStrategy::MultiPS: return "multips";
    case ExperimentStrategy::BaselineSolver: return "baseline-solver";
  }
  return "?";
}

inline std::optional<ExperimentStrategy> experimentStrategyFromString(const std::string& s) {
  if (s == "apollo") return ExperimentStrategy::Apollo;
  if (s == "direct") return ExperimentStrategy::DirectFix;
  if (s == "multips") return ExperimentStrategy::MultiPS;
  if (s == "baseline-solver") return ExperimentStrategy::BaselineSolver;
  return std::nullopt;
}

struct ExperimentConfig {
  ExperimentStrategy strategy = ExperimentStrategy::Apollo;
  Schedule schedule;  // empty: per-instance default from the binary count
  BackendConfig backend;
  std::uint64_t seed = 0;
  int workers = 1;
  bool objectiveCut = false;
  double totalBudgetSec = 60.0;  // used when schedule is empty and for the baseline
  /// Builds the per-instance predictor; receives a stream seed derived from
  /// (experiment seed, instance index).
  std::function<Predictor(const MilpInstance&, std::uint64_t)> predictorFactory;
  std::map<std::string, double> bksOverride;
};

struct ExperimentRow {
  std::string instance;
  std::string strategy;
  std::string status = "ok";
  int vars = 0;
  int binaries = 0;
  int cons = 0;
  std::optional<double> objective;
  std::optional<double> bks;
  std::string bksSource;  // enumerator | override | self | (empty)
  std::optional<double> gapAbs;
  std::optional<double> gapRel;
  int iterations = 0;
  int fixedTotal = 0;
  double meanConsistentFraction = 0.0;
  double elapsedSec = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> trajectory;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  ExperimentRow aggregate;  // means over rows with status "ok"
};

namespace detail {

inline ExperimentRow runOneExperiment(const MilpInstance& inst, const ExperimentConfig& cfg,
                                      std::uint64_t instSeed) {
  ExperimentRow row;
  row.instance = inst.name;
  row.strategy = toString(cfg.strategy);
  row.vars = inst.numVars;
  row.binaries = inst.numBinary();
  row.cons = inst.numRows();
  row.seed = instSeed;

  Schedule schedule = cfg.schedule;
  if (schedule.iterations.empty())
    schedule = defaultSchedule(inst.numBinary(), cfg.totalBudgetSec);

  if (cfg.strategy == ExperimentStrategy::BaselineSolver) {
    BackendConfig solveCfg = cfg.backend;
    solveCfg.timeLimitSec = cfg.totalBudgetSec;
    SolveResult res = solve(inst, solveCfg);
    row.elapsedSec = res.solveSeconds;
    if (res.hasIncumbent()) {
      row.objective = res.objective;
      row.trajectory.emplace_back(cfg.totalBudgetSec, *res.objective);
    } else {
      row.status = std::string("no-incumbent:") + toString(res.status);
    }
  } else {
    if (!cfg.predictorFactory)
      throw ConfigError("experiment: strategy needs a predictor, none configured");
    Predictor predictor = cfg.predictorFactory(inst, instSeed);
    RunOptions opts;
    opts.objectiveCut = cfg.objectiveCut;
    opts.strategy = cfg.strategy == ExperimentStrategy::Apollo ? FixStrategy::Consistency
                    : cfg.strategy == ExperimentStrategy::DirectFix ? FixStrategy::Direct
                                                                    : FixStrategy::Predicted;
    RunRecord rec = runApollo(inst, predictor, schedule, cfg.backend, opts);
    row.status = rec.status;
    row.objective = rec.objective;
    row.iterations = static_cast<int>(rec.iterations.size());
    row.trajectory = rec.trajectory;
    row.elapsedSec = rec.elapsedSec;
    if (!rec.iterations.empty()) {
      row.fixedTotal = rec.iterations.back().cumulativeFixed;
      double s = 0.0;
      for (const auto& it : rec.iterations) s += it.consistentFraction;
      row.meanConsistentFraction = s / static_cast<double>(rec.iterations.size());
    }
  }

  // best-known-solution reference
  if (auto it = cfg.bksOverride.find(inst.name); it != cfg.bksOverride.end()) {
    row.bks = it->second;
    row.bksSource = "override";
  } else if (inst.pureBinary() &&
             static_cast<int>(inst.freeBinaryIndices().size()) <= cfg.backend.maxEnumVars) {
    BackendConfig enumCfg = cfg.backend;
    enumCfg.kind = BackendKind::Enumerate;
    enumCfg.nodeBudget = 0;  // the reference must be exact
    SolveResult res = solveEnumerate(inst, enumCfg);
    if (res.hasIncumbent()) {
      row.bks = res.objective;
      row.bksSource = "enumerator";
    }
  } else if (row.objective) {
    row.bks = row.objective;
    row.bksSource = "self";
  }
  if (row.objective && row.bks) {
    auto [gapAbs, gapRel] = computeGaps(*row.objective, *row.bks);
    row.gapAbs = gapAbs;
    row.gapRel = gapRel;
  }
  return row;
}

}  // namespace detail

/// Runs one strategy over a batch. Per-instance failures become rows with an
/// error status instead of aborting the batch. Instances may run on parallel
/// workers; each row's randomness comes from (seed, instance index) only, so
/// results do not depend on the worker count.
inline ExperimentResult runExperiment(const std::vector<MilpInstance>& instances,
                                      const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.rows.resize(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= instances.size()) break;
      std::uint64_t instSeed = deriveSeed(cfg.seed, i);
      try {
        result.rows[i] = detail::runOneExperiment(instances[i], cfg, instSeed);
      } catch (const std::exception& e) {
        ExperimentRow row;
        row.instance = instances[i].name;
        row.strategy = toString(cfg.strategy);
        row.status = std::string("error: ") + e.what();
        row.seed = instSeed;
        result.rows[i] = row;
      }
    }
  };
  int workers = std::max(1, cfg.workers);
  if (workers == 1 || instances.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentRow& agg = result.aggregate;
  agg.instance = "__mean__";
  agg.strategy = toString(cfg.strategy);
  int n = 0;
  double obj = 0, bks = 0, gapAbs = 0, gapRel = 0, cons = 0, elapsed = 0;
  int gapRelCount = 0, fixedTotal = 0;
  for (const ExperimentRow& r : result.rows) {
    if (r.status != "ok" || !r.objective) continue;
    ++n;
    obj += *r.objective;
    if (r.bks) bks += *r.bks;
    if (r.gapAbs) gapAbs += *r.gapAbs;
    if (r.gapRel) {
      gapRel += *r.gapRel;
      ++gapRelCount;
    }
    cons += r.meanConsistentFraction;
    elapsed += r.elapsedSec;
    fixedTotal += r.fixedTotal;
  }
  if (n > 0) {
    agg.status = "ok";
    agg.objective = obj / n;
    agg.bks = bks / n;
    agg.gapAbs = gapAbs / n;
    if (gapRelCount > 0) agg.gapRel = gapRel / gapRelCount;
    agg.meanConsistentFraction = cons / n;
    agg.elapsedSec = elapsed / n;
    agg.fixedTotal = fixedTotal / n;
  } else {
    agg.status = "empty";
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV serialization (fixed column order, documented in the README)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csvOpt(const std::optional<double>& v) { return v ? fmt17(*v) : ""; }

}  // namespace detail

// Wall-clock timings stay out of the experiment CSV so one seed gives
// byte-identical artifacts across runs.
inline std::string experimentCsvHeader() {
  return "instance,strategy,status,vars,binaries,cons,objective,bks,bksSource,gapAbs,gapRel,"
         "iterations,fixedTotal,meanConsistentFraction,seed\n";
}

inline std::string experimentCsvRow(const ExperimentRow& r) {
  std::string status = r.status;
  for (char& c : status)
    if (c == ',' || c == '\n') c = ';';
  return r.instance + "," + r.strategy + "," + status + "," + std::to_string(r.vars) + "," +
         std::to_string(r.binaries) + "," + std::to_string(r.cons) + "," +
         detail::csvOpt(r.objective) + "," + detail::csvOpt(r.bks) + "," + r.bksSource + "," +
         detail::csvOpt(r.gapAbs) + "," + detail::csvOpt(r.gapRel) + "," +
         std::to_string(r.iterations) + "," + std::to_string(r.fixedTotal) + "," +
         fmt17(r.meanConsistentFraction) + "," + std::to_string(r.seed) + "\n";
}

inline std::string experimentCsv(const ExperimentResult& result) {
  std::string out = experimentCsvHeader();
  for (const ExperimentRow& r : result.rows) out += experimentCsvRow(r);
  out += experimentCsvRow(result.aggregate);
  return out;
}

inline std::string trajectoryCsv(const std::vector<std::pair<double, double>>& traj) {
  std::string out = "timeSec,objective\n";
  for (const auto& [t, o] : traj) out += fmt17(t) + "," + fmt17(o) + "\n";
  return out;
}

inline std::string runRecordCsv(const RunRecord& rec) {
  std::string out =
      "iteration,status,referenceObjective,selectedCount,fixedCount,cumulativeFixed,"
      "consistentFraction,elapsedSec\n";
  for (const IterationRecord& it : rec.iterations) {
    out += std::to_string(it.index) + "," + toString(it.status) + "," +
           detail::csvOpt(it.referenceObjective) + "," + std::to_string(it.selectedCount) + "," +
           std::to_string(it.fixedCount) + "," + std::to_string(it.cumulativeFixed) + "," +
           fmt17(it.consistentFraction) + "," + fmt17(it.elapsedSec) + "\n";
  }
  return out;
}

/// Batch pool collection; infeasible instances get an empty pool with status.
struct PoolCollection {
  std::string instanceName;
  SolutionPool pool;
  std::string status;  // ok | infeasible
};

inline PoolCollection collectPoolsForInstance(const MilpInstance& inst, const BackendConfig& cfg,
                                              int m) {
  PoolCollection pc;
  pc.instanceName = inst.name;
  pc.pool = collectPool(inst, cfg, m);
  pc.status = pc.pool.empty() ? "infeasible" : "ok";
  return pc;
}

}  // namespace apollo
