#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "apollo/instance_gen.hpp"
#include "apollo/orchestrator.hpp"
#include "oracle.hpp"

using namespace apollo;

namespace {

Schedule flatSchedule(int iterations, int k0, int delta) {
  Schedule s;
  for (int i = 0; i < iterations; ++i) s.iterations.push_back({k0, 0, delta, 10.0});
  return s;
}

}  // namespace

TEST_CASE("gap metrics") {
  SECTION("published reference row reproduces to two decimals") {
    auto [gapAbs, gapRel] = computeGaps(97297.52, 97616.59);
    CHECK(std::round(gapAbs * 100.0) / 100.0 == Catch::Approx(319.07));
    REQUIRE(gapRel.has_value());
    CHECK(*gapRel == Catch::Approx(319.07 / 97616.59).epsilon(1e-6));
    CHECK(*gapRel == Catch::Approx(3.2686e-3).epsilon(1e-4));
  }
  SECTION("matching objective has zero gaps") {
    auto [gapAbs, gapRel] = computeGaps(5.5, 5.5);
    CHECK(gapAbs == 0.0);
    REQUIRE(gapRel.has_value());
    CHECK(*gapRel == 0.0);
  }
  SECTION("zero reference leaves the relative gap undefined") {
    auto [gapAbs, gapRel] = computeGaps(1.0, 0.0);
    CHECK(gapAbs == 1.0);
    CHECK_FALSE(gapRel.has_value());
  }
  SECTION("non-finite reference is rejected") {
    CHECK_THROWS_AS(computeGaps(1.0, std::nan("")), ConfigError);
  }
}

TEST_CASE("default schedule respects the instance size") {
  for (int n : {10, 16, 40, 300}) {
    Schedule s = defaultSchedule(n, 100.0);
    REQUIRE(s.iterations.size() == 4);
    s.validate(n);
    CHECK(s.totalFix() <= n);
    for (const auto& it : s.iterations) CHECK(it.delta <= it.k0 + it.k1);
  }
  CHECK_THROWS_AS(flatSchedule(3, 10, 0).validate(20), ConfigError);  // 30 > 20
  CHECK_THROWS_AS(Schedule{}.validate(5), ConfigError);
}

TEST_CASE("perfect oracle recovers the certified optimum") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    MilpInstance ca = genCa({8, 16, seed, 0.65, 5, 0.2, 0.5});
    SolveResult exact = solveEnumerate(ca, {});
    REQUIRE(exact.hasIncumbent());

    Predictor oracle = makeOraclePredictor(*exact.incumbent, 0.0, 1.0, seed);
    RunRecord rec = runApollo(ca, oracle, defaultSchedule(ca.numBinary(), 8.0), {});
    REQUIRE(rec.objective.has_value());
    CHECK(*rec.objective == Catch::Approx(*exact.objective).margin(1e-9));
    CHECK(rec.status == "ok");
    CHECK(checkFeasibility(ca, *rec.best).feasible);
  }
}

TEST_CASE("single-iteration schedule is a one-shot trust-region search") {
  MilpInstance ca = genCa({6, 14, 9, 0.6, 4, 0.2, 0.5});
  SolveResult exact = solveEnumerate(ca, {});
  REQUIRE(exact.hasIncumbent());
  Predictor oracle = makeOraclePredictor(*exact.incumbent, 0.1, 0.9, 5);

  Schedule oneShot = flatSchedule(1, 4, 1);
  RunRecord rec = runApollo(ca, oracle, oneShot, {});

  // reproduce by hand: same marginals, same partial, same search problem
  MarginalPrediction marginals = oracle(ca, 0);
  PartialAssignment partial = selectPartial(ca, marginals, {4, 0, 1});
  SolveResult direct = solveEnumerate(buildTrustRegion(ca, partial, 1), {});
  REQUIRE(rec.objective.has_value());
  REQUIRE(direct.objective.has_value());
  CHECK(*rec.objective == Catch::Approx(*direct.objective).margin(1e-12));
  CHECK(rec.iterations.size() == 1);
  CHECK(rec.iterations[0].fixedCount == 0);  // final iteration never fixes
}

TEST_CASE("trajectory is monotone and cumulative fixes add up") {
  MilpInstance ca = genCa({10, 18, 12, 0.65, 5, 0.2, 0.5});
  SolveResult exact = solveEnumerate(ca, {});
  REQUIRE(exact.hasIncumbent());
  Predictor noisy = makeOraclePredictor(*exact.incumbent, 0.25, 0.9, 99);

  RunRecord rec = runApollo(ca, noisy, flatSchedule(4, 3, 1), {});
  for (std::size_t i = 1; i < rec.trajectory.size(); ++i) {
    CHECK(rec.trajectory[i].second < rec.trajectory[i - 1].second);
    CHECK(rec.trajectory[i].first >= rec.trajectory[i - 1].first);
  }
  REQUIRE(rec.objective.has_value());
  CHECK(*rec.objective == rec.trajectory.back().second);

  int cumulative = 0;
  for (const IterationRecord& it : rec.iterations) {
    cumulative += it.fixedCount;
    CHECK(it.cumulativeFixed == cumulative);
    CHECK(it.consistentFraction >= 0.0);
    CHECK(it.consistentFraction <= 1.0);
  }
}

TEST_CASE("infeasible instances abort on the first iteration") {
  MilpInstance inst;
  inst.name = "void";
  inst.numVars = 2;
  inst.objective = {1.0, 1.0};
  inst.lower.assign(2, 0.0);
  inst.upper.assign(2, 1.0);
  inst.kinds.assign(2, VarKind::Binary);
  inst.triplets = {{0, 0, 1.0}, {1, 0, 1.0}};
  inst.senses = {RowSense::Equal, RowSense::Equal};
  inst.rhs = {1.0, 0.0};

  MarginalPrediction uniform{{0.5, 0.5}};
  Predictor flat = [uniform](const MilpInstance&, int) { return uniform; };
  RunRecord rec = runApollo(inst, flat, flatSchedule(2, 1, 0), {});
  CHECK(rec.status == "infeasible");
  CHECK_FALSE(rec.objective.has_value());
}

TEST_CASE("objective cut keeps runs monotone and falls back when exhausted") {
  MilpInstance ca = genCa({8, 15, 44, 0.65, 4, 0.2, 0.5});
  SolveResult exact = solveEnumerate(ca, {});
  REQUIRE(exact.hasIncumbent());
  Predictor noisy = makeOraclePredictor(*exact.incumbent, 0.2, 0.9, 7);

  RunOptions opts;
  opts.objectiveCut = true;
  RunRecord rec = runApollo(ca, noisy, flatSchedule(4, 3, 1), {}, opts);
  CHECK(rec.status == "ok");
  REQUIRE(rec.objective.has_value());
  // with the exact backend the cut cannot make the final answer worse than
  // the plain run's reference trajectory
  std::optional<double> prev;
  for (const IterationRecord& it : rec.iterations) {
    if (it.referenceObjective && prev) CHECK(*it.referenceObjective <= *prev + 1e-9);
    if (it.referenceObjective) prev = it.referenceObjective;
  }
}

TEST_CASE("experiment harness") {
  std::vector<MilpInstance> instances;
  for (std::uint64_t seed : {70u, 71u, 72u})
    instances.push_back(genCa({6, 14, seed, 0.6, 4, 0.2, 0.5}));

  ExperimentConfig cfg;
  cfg.strategy = ExperimentStrategy::Apollo;
  cfg.schedule = flatSchedule(3, 3, 1);
  cfg.seed = 5;
  cfg.predictorFactory = [](const MilpInstance& inst, std::uint64_t seed) {
    SolveResult res = solveEnumerate(inst, {});
    return makeOraclePredictor(*res.incumbent, 0.2, 0.9, seed);
  };

  SECTION("rows, aggregate, and reproducibility") {
    ExperimentResult a = runExperiment(instances, cfg);
    REQUIRE(a.rows.size() == 3);
    for (const ExperimentRow& row : a.rows) {
      CHECK(row.status == "ok");
      CHECK(row.bksSource == "enumerator");
      REQUIRE(row.gapAbs.has_value());
      CHECK(*row.gapAbs >= 0.0);
    }
    CHECK(a.aggregate.status == "ok");

    ExperimentResult b = runExperiment(instances, cfg);
    CHECK(experimentCsv(a) == experimentCsv(b));

    ExperimentConfig parallel = cfg;
    parallel.workers = 3;
    ExperimentResult c = runExperiment(instances, parallel);
    CHECK(experimentCsv(a) == experimentCsv(c));
  }

  SECTION("empty batch yields a header-only table") {
    ExperimentResult empty = runExperiment({}, cfg);
    CHECK(empty.rows.empty());
    CHECK(empty.aggregate.status == "empty");
    std::string csv = experimentCsv(empty);
    CHECK(csv.find("instance,strategy") == 0);
  }

  SECTION("per-instance failures never abort the batch") {
    ExperimentConfig failing = cfg;
    failing.predictorFactory = [](const MilpInstance& inst, std::uint64_t) -> Predictor {
      if (!inst.name.empty() && inst.name.back() == '1')  // seed 71
        throw ConfigError("synthetic predictor failure");
      SolveResult res = solveEnumerate(inst, {});
      return makeOraclePredictor(*res.incumbent, 0.0, 1.0, 0);
    };
    ExperimentResult res = runExperiment(instances, failing);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[1].status.rfind("error:", 0) == 0);
    CHECK(res.rows[0].status == "ok");
    CHECK(res.rows[2].status == "ok");
  }

  SECTION("baseline solver strategy") {
    ExperimentConfig baseline = cfg;
    baseline.strategy = ExperimentStrategy::BaselineSolver;
    baseline.predictorFactory = nullptr;
    ExperimentResult res = runExperiment(instances, baseline);
    for (const ExperimentRow& row : res.rows) {
      CHECK(row.status == "ok");
      REQUIRE(row.gapAbs.has_value());
      CHECK(*row.gapAbs == 0.0);  // exact backend solves to optimality
    }
  }
}

TEST_CASE("pool collection records infeasible instances") {
  MilpInstance inst;
  inst.name = "void2";
  inst.numVars = 1;
  inst.objective = {1.0};
  inst.lower = {0.0};
  inst.upper = {1.0};
  inst.kinds = {VarKind::Binary};
  inst.triplets = {{0, 0, 1.0}, {1, 0, 1.0}};
  inst.senses = {RowSense::Equal, RowSense::Equal};
  inst.rhs = {1.0, 0.0};

  PoolCollection pc = collectPoolsForInstance(inst, {}, 3);
  CHECK(pc.status == "infeasible");
  CHECK(pc.pool.empty());
}
