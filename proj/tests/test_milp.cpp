#include <catch2/catch_amalgamated.hpp>

#include "apollo/instance_gen.hpp"
#include "apollo/milp.hpp"
#include "oracle.hpp"

using namespace apollo;

namespace {

MilpInstance binaryInstance(int n) {
  MilpInstance inst;
  inst.name = "bin" + std::to_string(n);
  inst.numVars = n;
  inst.objective.assign(n, 0.0);
  inst.lower.assign(n, 0.0);
  inst.upper.assign(n, 1.0);
  inst.kinds.assign(n, VarKind::Binary);
  return inst;
}

void addRow(MilpInstance& inst, std::vector<std::pair<int, double>> terms, RowSense sense,
            double rhs) {
  int row = inst.numRows();
  for (auto [col, coef] : terms) inst.triplets.push_back({row, col, coef});
  inst.senses.push_back(sense);
  inst.rhs.push_back(rhs);
}

}  // namespace

TEST_CASE("objective evaluation") {
  MilpInstance inst = binaryInstance(2);
  inst.objective = {1.0, 2.0};
  CHECK(evaluateObjective(inst, Assignment{{0.0, 0.0}}) == 0.0);
  CHECK(evaluateObjective(inst, Assignment{{1.0, 1.0}}) == 3.0);

  MilpInstance five = binaryInstance(5);
  five.objective = {-1, -1, -1, -1, -1};
  Assignment a{{1, 0, 1, 1, 1}};
  double byHand = 0.0;
  for (int j = 0; j < 5; ++j) byHand += five.objective[j] * a.values[j];
  CHECK(evaluateObjective(five, a) == byHand);
  CHECK(evaluateObjective(five, a) == -4.0);

  CHECK_THROWS_AS(evaluateObjective(five, Assignment{{1, 0}}), DimensionError);
}

TEST_CASE("feasibility reporting") {
  MilpInstance inst = binaryInstance(2);
  addRow(inst, {{0, 1.0}, {1, 1.0}}, RowSense::LessEqual, 1.0);

  FeasibilityReport bad = checkFeasibility(inst, Assignment{{1.0, 1.0}});
  CHECK_FALSE(bad.feasible);
  CHECK(bad.rowViolations[0] == Catch::Approx(1.0));

  MilpInstance empty = binaryInstance(3);
  CHECK(checkFeasibility(empty, Assignment{{0, 1, 0}}).feasible);

  // brute-force backend only returns feasible points
  MilpInstance ca = genCa({4, 10, 99, 0.6, 4, 0.2, 0.5});
  auto best = testoracle::bruteOptimum(ca);
  REQUIRE(best.has_value());
  CHECK(checkFeasibility(ca, testoracle::fromBits(ca.numVars, best->second)).feasible);

  // exact at tol 0 on rational coefficients
  MilpInstance exact = binaryInstance(2);
  addRow(exact, {{0, 2.0}, {1, 3.0}}, RowSense::LessEqual, 5.0);
  CHECK(checkFeasibility(exact, Assignment{{1.0, 1.0}}, 0.0).feasible);
  addRow(exact, {{0, 1.0}}, RowSense::Equal, 0.5);
  CHECK_FALSE(checkFeasibility(exact, Assignment{{1.0, 1.0}}, 0.0).feasible);

  // integrality violations are reported
  MilpInstance frac = binaryInstance(1);
  FeasibilityReport rep = checkFeasibility(frac, Assignment{{0.4}});
  CHECK_FALSE(rep.feasible);
  CHECK(rep.integralityViolations[0] == Catch::Approx(0.4));
}

TEST_CASE("variable fixing") {
  MilpInstance inst = binaryInstance(5);
  inst.objective = {-1, -2, -3, -4, -5};
  addRow(inst, {{0, 1.0}, {1, 1.0}, {2, 1.0}}, RowSense::LessEqual, 2.0);

  SECTION("empty fixing is the identity") {
    MilpInstance out = fixVariables(inst, {});
    CHECK(out.lower == inst.lower);
    CHECK(out.upper == inst.upper);
    CHECK(out.triplets.size() == inst.triplets.size());
  }

  SECTION("fixing collapses bounds at the chosen value") {
    PartialAssignment pa{{0, 2}, {1.0, 1.0}};
    MilpInstance out = fixVariables(inst, pa);
    CHECK(out.lower[0] == 1.0);
    CHECK(out.upper[0] == 1.0);
    CHECK(out.lower[2] == 1.0);
    CHECK(out.upper[2] == 1.0);
    CHECK(out.lower[1] == 0.0);
    CHECK(out.upper[1] == 1.0);
    CHECK(out.isFixed(0));
    CHECK_FALSE(out.isFixed(1));
  }

  SECTION("refixing conflicts are rejected, same value is a no-op") {
    MilpInstance once = fixVariables(inst, PartialAssignment{{1}, {0.0}});
    CHECK_NOTHROW(fixVariables(once, PartialAssignment{{1}, {0.0}}));
    CHECK_THROWS_AS(fixVariables(once, PartialAssignment{{1}, {1.0}}), ConflictError);
  }

  SECTION("fixing the optimal restriction preserves the optimum") {
    MilpInstance ca = genCa({5, 12, 3, 0.65, 4, 0.2, 0.5});
    auto before = testoracle::bruteOptimum(ca);
    REQUIRE(before.has_value());
    PartialAssignment pa;
    for (int j = 0; j < ca.numVars; j += 2) {
      pa.indices.push_back(j);
      pa.values.push_back(static_cast<double>((before->second >> j) & 1ULL));
    }
    auto after = testoracle::bruteOptimum(fixVariables(ca, pa));
    REQUIRE(after.has_value());
    CHECK(after->first == Catch::Approx(before->first));
  }

  SECTION("fixing never enlarges the feasible set") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
      MilpInstance ca = genCa({4, 9, static_cast<std::uint64_t>(100 + trial), 0.6, 3, 0.2, 0.5});
      PartialAssignment pa;
      for (int j = 0; j < ca.numVars; ++j)
        if (bernoulli(rng, 0.3)) {
          pa.indices.push_back(j);
          pa.values.push_back(bernoulli(rng, 0.5) ? 1.0 : 0.0);
        }
      auto reducedSet = testoracle::feasibleSet(fixVariables(ca, pa));
      auto fullSet = testoracle::feasibleSet(ca);
      for (std::uint64_t bits : reducedSet) CHECK(fullSet.count(bits) == 1);
    }
  }

  SECTION("reduction composes over disjoint index sets") {
    PartialAssignment p1{{0, 3}, {1.0, 0.0}};
    PartialAssignment p2{{1, 4}, {0.0, 1.0}};
    PartialAssignment both{{0, 1, 3, 4}, {1.0, 0.0, 0.0, 1.0}};
    MilpInstance seq = fixVariables(fixVariables(inst, p1), p2);
    MilpInstance oneShot = fixVariables(inst, both);
    CHECK(seq.lower == oneShot.lower);
    CHECK(seq.upper == oneShot.upper);
  }
}

TEST_CASE("objective cut") {
  MilpInstance inst = binaryInstance(2);
  inst.objective = {1.0, 2.0};

  SECTION("constructs the expected row") {
    MilpInstance cut = addObjectiveCut(inst, 0.0, 1e-6);
    REQUIRE(cut.numRows() == 1);
    CHECK(cut.senses.back() == RowSense::LessEqual);
    CHECK(cut.rhs.back() == Catch::Approx(-1e-6));
    CHECK(cut.triplets.size() == 2);
    CHECK(cut.triplets[0].value == 1.0);
    CHECK(cut.triplets[1].value == 2.0);
  }

  SECTION("cutting at the incumbent objective excludes the incumbent") {
    Assignment incumbent{{1.0, 0.0}};
    double obj = evaluateObjective(inst, incumbent);
    MilpInstance cut = addObjectiveCut(inst, obj);
    CHECK_FALSE(checkFeasibility(cut, incumbent).feasible);
  }

  SECTION("optimum after the cut strictly improves or the cut empties the set") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
      MilpInstance ca = genCa({4, 10, seed, 0.6, 3, 0.2, 0.5});
      auto before = testoracle::bruteOptimum(ca);
      REQUIRE(before.has_value());
      auto after = testoracle::bruteOptimum(addObjectiveCut(ca, before->first));
      if (after.has_value()) CHECK(after->first < before->first);
    }
    // cutting at the certified optimum empties the feasible set (checked at
    // tolerance zero; the cut margin sits exactly at the default tolerance)
    MilpInstance tiny = binaryInstance(1);
    tiny.objective = {1.0};
    CHECK_FALSE(testoracle::bruteOptimum(addObjectiveCut(tiny, 0.0), 0.0).has_value());
  }
}

TEST_CASE("fixed-column elimination pass") {
  MilpInstance inst = binaryInstance(4);
  inst.objective = {3.0, 5.0, 7.0, 11.0};
  addRow(inst, {{0, 1.0}, {1, 2.0}, {2, 1.0}}, RowSense::GreaterEqual, 2.0);
  MilpInstance fixed = fixVariables(inst, PartialAssignment{{1}, {1.0}});
  EliminationResult elim = eliminateFixed(fixed);
  CHECK(elim.reduced.numVars == 3);
  CHECK(elim.objectiveOffset == Catch::Approx(5.0));
  CHECK(elim.reduced.rhs[0] == Catch::Approx(0.0));  // 2 - 2*1
  CHECK(elim.keptToOriginal == std::vector<int>{0, 2, 3});

  auto full = testoracle::bruteOptimum(fixed);
  auto reduced = testoracle::bruteOptimum(elim.reduced);
  REQUIRE(full.has_value());
  REQUIRE(reduced.has_value());
  CHECK(full->first == Catch::Approx(reduced->first + elim.objectiveOffset));
}
