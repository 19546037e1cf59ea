#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "apollo/backend.hpp"
#include "apollo/instance_gen.hpp"
#include "apollo/training.hpp"

using namespace apollo;

namespace {

std::vector<TrainSample> deskSamples(int count, std::uint64_t seed, int poolSize) {
  std::vector<TrainSample> samples;
  for (int i = 0; i < count; ++i) {
    MilpInstance inst = genCa({5, 12, seed + static_cast<std::uint64_t>(i), 0.6, 4, 0.2, 0.5});
    BackendConfig cfg;
    cfg.poolSize = poolSize;
    SolveResult res = solveEnumerate(inst, cfg);
    REQUIRE(res.pool.has_value());
    samples.push_back(makeTrainSample(inst, *res.pool));
  }
  return samples;
}

}  // namespace

TEST_CASE("training is deterministic and improves on the initial model") {
  std::vector<TrainSample> data = deskSamples(2, 100, 4);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.hidden = 8;
  cfg.seed = 5;

  GnnModel a = train(data, {}, cfg);
  GnnModel b = train(data, {}, cfg);
  CHECK(modelToText(a) == modelToText(b));
  CHECK(datasetLoss(a, data) == datasetLoss(b, data));

  GnnModel initial = xavierInit(cfg.hidden, cfg.numLayers, data.front().graph.varFeatDim, cfg.seed);
  CHECK(datasetLoss(a, data) <= datasetLoss(initial, data));
}

TEST_CASE("early stopping returns the best validation checkpoint") {
  std::vector<TrainSample> data = deskSamples(2, 300, 4);
  std::vector<TrainSample> val = deskSamples(1, 400, 4);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.hidden = 8;
  cfg.patience = 3;
  GnnModel model = train(data, val, cfg);
  GnnModel initial = xavierInit(cfg.hidden, cfg.numLayers, data.front().graph.varFeatDim, cfg.seed);
  CHECK(datasetLoss(model, val) <= datasetLoss(initial, val));
}

TEST_CASE("overfit sanity on deterministic targets") {
  // singleton pools make every target 0 or 1
  std::vector<TrainSample> data = deskSamples(2, 500, 1);
  for (const TrainSample& s : data)
    for (double t : s.target.values) CHECK((t == 0.0 || t == 1.0));
  TrainConfig cfg;
  cfg.epochs = 800;
  cfg.hidden = 16;
  cfg.patience = 800;
  GnnModel model = train(data, {}, cfg);
  CHECK(datasetLoss(model, data) < 0.5);
}

TEST_CASE("augmentation samples distinct reduced instances") {
  MilpInstance inst = genCa({6, 20, 9, 0.65, 5, 0.2, 0.5});
  BackendConfig cfg;
  cfg.poolSize = 5;
  SolveResult res = solveEnumerate(inst, cfg);
  REQUIRE(res.pool.has_value());

  Rng rng(42);
  std::vector<MilpInstance> reduced = augment(inst, *res.pool, rng, 5);
  REQUIRE(reduced.size() == 5);

  std::set<std::vector<double>> boundSets;
  for (const MilpInstance& r : reduced) {
    boundSets.insert(r.lower);
    // fixing along a feasible point keeps the instance feasible
    CHECK(checkFeasibility(r, res.pool->best().assignment).feasible);
    int nFixed = 0;
    for (int j = 0; j < r.numVars; ++j)
      if (r.isFixed(j)) ++nFixed;
    CHECK(nFixed >= static_cast<int>(0.3 * inst.numVars) - 1);
    CHECK(nFixed <= static_cast<int>(0.7 * inst.numVars) + 1);
  }
  CHECK(boundSets.size() >= 2);  // distinct fixed sets under one rng stream

  SECTION("a zero ratio reproduces the original") {
    Rng rng2(1);
    std::vector<MilpInstance> copies = augment(inst, *res.pool, rng2, 1, 0.0, 0.0);
    REQUIRE(copies.size() == 1);
    CHECK(copies[0].lower == inst.lower);
    CHECK(copies[0].upper == inst.upper);
  }
}

TEST_CASE("filtered pools keep only fixing-consistent members") {
  MilpInstance inst = genCa({5, 10, 13, 0.6, 4, 0.2, 0.5});
  BackendConfig cfg;
  cfg.poolSize = 6;
  SolveResult res = solveEnumerate(inst, cfg);
  REQUIRE(res.pool.has_value());

  Rng rng(7);
  MilpInstance reduced = augment(inst, *res.pool, rng, 1)[0];
  SolutionPool filtered = filterPoolForReduced(reduced, *res.pool);
  CHECK_FALSE(filtered.empty());  // the best member always survives
  for (const auto& e : filtered.entries)
    for (int j = 0; j < reduced.numVars; ++j)
      if (reduced.isFixed(j)) CHECK(e.assignment[j] == reduced.lower[j]);
}

TEST_CASE("empty training set is rejected") {
  CHECK_THROWS_AS(train({}, {}, {}), ConfigError);
}
