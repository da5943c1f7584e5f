#include <cmath>
#include <vector>

#include "doctest.h"
#include "kadapt/constraint_uncertainty.hpp"
#include "kadapt/double_oracle.hpp"
#include "kadapt/oracle.hpp"
#include "test_util.hpp"

using namespace kadapt;
using kadapt::testing::blank_instance;
using milp::RowSense;

namespace {

// Two unit recourses and two unit scenarios with xi_h'Q y_j = table[j][h].
KAdaptInstance table_instance(const std::vector<std::vector<double>>& table) {
  KAdaptInstance inst = blank_instance(0, 2, 2);
  for (int j = 0; j < 2; ++j) {
    for (int h = 0; h < 2; ++h) inst.recourse_cost(h, j) = table[j][h];
  }
  inst.recourse_set.add_row(std::vector<double>{1, 1}, RowSense::kEqual, 1);
  return inst;
}

ScenarioPool unit_scenarios() {
  ScenarioPool s;
  s.add({1.0, 0.0});
  s.add({0.0, 1.0});
  return s;
}

SolutionPool unit_solutions() {
  SolutionPool p;
  p.add({1.0, 0.0});
  p.add({0.0, 1.0});
  return p;
}

// Checks the max-min identities on every oracle solve of a run.
struct IdentityChecker {
  const KAdaptInstance* inst;
  std::vector<double> x;
  int checks = 0;

  SubproblemOptions options() {
    SubproblemOptions o;
    o.on_p_center = [this](const SolutionPool& pool, const ScenarioPool& scen,
                           std::span<const double>, const PCenterResult& pc) {
      if (pc.status != OracleStatus::kOptimal) return;
      std::vector<std::vector<double>> chosen;
      for (int j : pc.selected) chosen.push_back(pool[j]);
      CHECK(pc.value ==
            doctest::Approx(max_min_value(*inst, x, scen.scenarios(), chosen)).epsilon(1e-9));
      ++checks;
    };
    o.on_solution_generation = [this](const ScenarioPool& scen, std::span<const double>,
                                      const SolutionGenResult& sg) {
      if (sg.status != OracleStatus::kOptimal) return;
      CHECK(sg.value ==
            doctest::Approx(max_min_value(*inst, x, scen.scenarios(), sg.recourses)).epsilon(1e-9));
      ++checks;
    };
    return o;
  }
};

}  // namespace

TEST_CASE("pools reject duplicates") {
  ScenarioPool s;
  CHECK(s.add({1.0, 0.5}));
  CHECK_FALSE(s.add({1.0, 0.5 + 1e-10}));
  CHECK(s.add({1.0, 0.5 + 1e-8}));
  CHECK(s.size() == 2);
  SolutionPool p;
  CHECK(p.add({1, 0}) == 0);
  CHECK(p.add({0, 1}) == 1);
  CHECK(p.add({1, 0}) == 0);
  p.filter([](const std::vector<double>& y) { return y[0] == 0.0; });
  CHECK(p.size() == 1);
}

TEST_CASE("p-center") {
  const KAdaptInstance inst = table_instance({{1, 4}, {3, 2}});
  const SolutionPool pool = unit_solutions();
  const ScenarioPool scen = unit_scenarios();
  SUBCASE("K = 1 picks the second solution") {
    const PCenterResult r = solve_p_center(pool, scen, inst, {}, 1);
    CHECK(r.value == doctest::Approx(3.0));
    CHECK(r.selected == std::vector<int>{1});
    CHECK(r.assignment == std::vector<int>{1, 1});
  }
  SUBCASE("forced selection") {
    const PCenterResult r = solve_p_center(pool, scen, inst, {}, 2);
    CHECK(r.value == doctest::Approx(2.0));
    CHECK(r.selected.size() == 2);
    CHECK(r.assignment == std::vector<int>{0, 1});
  }
  SUBCASE("single scenario") {
    ScenarioPool one;
    one.add({0.0, 1.0});
    CHECK(solve_p_center(pool, one, inst, {}, 1).value == doctest::Approx(2.0));
  }
  SUBCASE("precondition") {
    SolutionPool small;
    small.add({1.0, 0.0});
    CHECK_THROWS_AS(solve_p_center(small, scen, inst, {}, 2), ModelError);
  }
}

TEST_CASE("scenario generation") {
  SUBCASE("single epigraph row") {
    KAdaptInstance inst = blank_instance(0, 1, 2);
    inst.recourse_cost(0, 0) = 2.0;
    inst.recourse_cost(1, 0) = 1.0;
    inst.scenario_set.rows.add_row(std::vector<double>{1, 1}, RowSense::kLessEqual, 1);
    const std::vector<std::vector<double>> ys{{1.0}};
    const ScenarioResult r = generate_scenario(ys, inst);
    CHECK(r.value == doctest::Approx(2.0));
    CHECK(r.xi[0] == doctest::Approx(1.0));
    CHECK(r.xi[1] == doctest::Approx(0.0));
  }
  SUBCASE("crossing lines") {
    KAdaptInstance inst = blank_instance(0, 2, 2);
    inst.scenario_set.lo = {1.0, 0.0};
    inst.scenario_set.hi = {1.0, 1.0};
    inst.recourse_cost(1, 0) = 2.0;
    inst.recourse_cost(0, 1) = 3.0;
    inst.recourse_cost(1, 1) = -3.0;
    const std::vector<std::vector<double>> ys{{1.0, 0.0}, {0.0, 1.0}};
    const ScenarioResult r = generate_scenario(ys, inst);
    CHECK(r.value == doctest::Approx(1.2));
    CHECK(r.xi[1] == doctest::Approx(0.6));
    const std::vector<std::vector<double>> twice{{1.0, 0.0}, {1.0, 0.0}};
    const std::vector<std::vector<double>> once{{1.0, 0.0}};
    CHECK(generate_scenario(twice, inst).value == doctest::Approx(generate_scenario(once, inst).value));
  }
}

TEST_CASE("solution generation") {
  KAdaptInstance inst = table_instance({{1, 0}, {0, 1}});  // Q = I
  const ScenarioPool scen = unit_scenarios();
  const SolutionGenResult two = generate_solutions(scen, inst, {}, 2);
  REQUIRE(two.status == OracleStatus::kOptimal);
  CHECK(two.value == doctest::Approx(0.0));
  CHECK(two.recourses[two.assignment[0]] == std::vector<double>{0, 1});
  CHECK(two.recourses[two.assignment[1]] == std::vector<double>{1, 0});
  CHECK(generate_solutions(scen, inst, {}, 1).value == doctest::Approx(1.0));
  ScenarioPool one;
  one.add({1.0, 0.0});
  CHECK(generate_solutions(one, inst, {}, 3).value == doctest::Approx(0.0));
  // Coupling that admits no recourse.
  KAdaptInstance blocked = inst;
  kadapt::testing::add_coupling_row(blocked, {}, {1, 1}, 0);
  CHECK(generate_solutions(scen, blocked, {}, 1).status == OracleStatus::kInfeasible);
}

TEST_CASE("inner loop on a single-point uncertainty set") {
  KAdaptInstance inst = table_instance({{1, 4}, {3, 2}});
  inst.scenario_set.lo = {0.0, 1.0};
  inst.scenario_set.hi = {0.0, 1.0};
  ScenarioPool scen;
  scen.add({0.0, 1.0});
  const InnerLoopResult r = run_inner_loop(unit_solutions(), scen, inst, {}, 1, {});
  CHECK(r.iterations == 1);
  CHECK(r.scenarios_added == 0);
  CHECK(r.ub == doctest::Approx(2.0));
}

TEST_CASE("subproblem matches the oracle on tiny instances") {
  for (Variant variant : {Variant::kObjective, Variant::kConstraint}) {
    for (const char* family : {"shortest-path", "knapsack", "generic"}) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const KAdaptInstance inst = generate_tiny(family, variant, 4, 1, seed);
        const BinaryPoints xs = enumerate_first_stage(inst);
        // A couple of first-stage points per instance keeps the test fast.
        for (size_t i = 0; i < xs.size() && i < 2; ++i) {
          for (int K = 1; K <= 3; ++K) {
            CAPTURE(inst.name);
            CAPTURE(K);
            const OracleResult ref = second_stage_value(inst, xs[i], K);
            IdentityChecker checker{&inst, xs[i]};
            const SubproblemResult sp = solve_subproblem(inst, xs[i], K, checker.options());
            if (!ref.feasible || std::isinf(ref.value)) {
              CHECK(sp.status == OracleStatus::kInfeasible);
              continue;
            }
            REQUIRE(sp.status == OracleStatus::kOptimal);
            CHECK(sp.ub == doctest::Approx(ref.value).epsilon(1e-9));
            CHECK(sp.lb <= sp.ub + 1e-6);
            CHECK(checker.checks > 0);
          }
        }
      }
    }
  }
}

TEST_CASE("subproblem value is nonincreasing in K") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KAdaptInstance inst = generate_tiny("shortest-path", Variant::kObjective, 5, 1, seed);
    const double one = solve_subproblem(inst, {}, 1, {}).ub;
    const double two = solve_subproblem(inst, {}, 2, {}).ub;
    CHECK(two <= one + 1e-6);
  }
}

TEST_CASE("constraint pipeline with inactive uncertainty matches the objective pipeline") {
  for (const char* family : {"shortest-path", "knapsack", "generic"}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const KAdaptInstance base = generate_tiny(family, Variant::kObjective, 4, 1, seed);
      const KAdaptInstance cu = with_zero_constraint_uncertainty(base);
      const BinaryPoints xs = enumerate_first_stage(base);
      REQUIRE_FALSE(xs.empty());
      for (int K = 1; K <= 2; ++K) {
        const SubproblemResult a = solve_subproblem(base, xs[0], K, {});
        const SubproblemResult b = solve_subproblem(cu, xs[0], K, {});
        REQUIRE(a.status == b.status);
        if (a.status == OracleStatus::kOptimal) CHECK(a.ub == doctest::Approx(b.ub).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("constraint-uncertainty oracles") {
  // Scalar xi in [0,1]; recourse 1 (cost 1) needs xi <= 0.5, recourse 2
  // (cost 5) always works.
  KAdaptInstance inst = blank_instance(0, 2, 2);
  inst.scenario_set.lo = {1.0, 0.0};
  inst.scenario_set.hi = {1.0, 1.0};
  inst.recourse_cost(0, 0) = 1.0;
  inst.recourse_cost(0, 1) = 5.0;
  inst.recourse_set.add_row(std::vector<double>{1, 1}, RowSense::kEqual, 1);
  inst.variant = Variant::kConstraint;
  inst.coupling_uncertain.assign(2, Matrix(0, 2));
  kadapt::testing::add_coupling_row(inst, {}, {0, 0}, 0.5);
  inst.coupling_uncertain[1](0, 0) = 1.0;
  validate(inst);

  CHECK_FALSE(recourse_violated(inst, {}, std::vector<double>{1, 0}, std::vector<double>{1, 0.5}));
  CHECK(recourse_violated(inst, {}, std::vector<double>{1, 0}, std::vector<double>{1, 0.6}));

  const std::vector<std::vector<double>> first{{1, 0}};
  const ScenarioResult kill = generate_scenario_cu(first, inst, {});
  CHECK(kill.kills_all);
  const std::vector<std::vector<double>> both{{1, 0}, {0, 1}};
  const ScenarioResult r = generate_scenario_cu(both, inst, {});
  CHECK_FALSE(r.kills_all);
  CHECK(r.value == doctest::Approx(5.0));

  ScenarioPool scen;
  scen.add({1.0, 0.0});
  scen.add({1.0, 1.0});
  const PCenterResult pc = solve_p_center_cu(unit_solutions(), scen, inst, {}, 1);
  CHECK(pc.value == doctest::Approx(5.0));
  const SolutionGenResult sg = generate_solutions_cu(scen, inst, {}, 2);
  CHECK(sg.value == doctest::Approx(5.0));

  for (int K = 1; K <= 2; ++K) {
    const SubproblemResult sp = solve_subproblem(inst, {}, K, {});
    CHECK(sp.ub == doctest::Approx(second_stage_value(inst, {}, K).value));
  }
}
