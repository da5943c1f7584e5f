#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "kadapt/milp.hpp"

using namespace kadapt;
using namespace kadapt::milp;

namespace {

// Exhaustive minimum over all binary points of a pure-binary model.
double enumerate_binary_optimum(const MilpModel& model, bool* feasible) {
  const int n = model.num_vars();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> x(n);
  for (long mask = 0; mask < (1L << n); ++mask) {
    for (int j = 0; j < n; ++j) x[j] = (mask >> j) & 1;
    bool ok = true;
    for (const Row& row : model.rows()) {
      double act = 0;
      for (const Term& t : row.terms) act += t.coef * x[t.var];
      if (row.sense == RowSense::kLessEqual && act > row.rhs + 1e-9) ok = false;
      if (row.sense == RowSense::kGreaterEqual && act < row.rhs - 1e-9) ok = false;
      if (row.sense == RowSense::kEqual && std::abs(act - row.rhs) > 1e-9) ok = false;
    }
    if (!ok) continue;
    double z = model.evaluate_objective(x);
    if (model.sense() == ObjectiveSense::kMaximize) z = -z;
    best = std::min(best, z);
  }
  *feasible = std::isfinite(best);
  return model.sense() == ObjectiveSense::kMaximize ? -best : best;
}

MilpModel random_binary_model(std::mt19937_64& rng, int n, int rows,
                              bool mixed_senses) {
  std::uniform_int_distribution<int> coef(-9, 9);
  std::uniform_int_distribution<int> sense(0, 4);
  MilpModel model;
  for (int j = 0; j < n; ++j) model.add_binary();
  for (int i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) terms.push_back({j, static_cast<double>(coef(rng))});
    RowSense s = RowSense::kLessEqual;
    if (mixed_senses) {
      const int k = sense(rng);
      s = k == 0 ? RowSense::kGreaterEqual : k == 1 ? RowSense::kEqual : RowSense::kLessEqual;
    }
    const double rhs = s == RowSense::kEqual ? coef(rng) / 3 : coef(rng) + 4;
    model.add_row(std::move(terms), s, rhs);
  }
  std::vector<Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, static_cast<double>(coef(rng))});
  model.set_objective(std::move(obj));
  return model;
}

// Lagrangian bound from the returned row duals (minimization models).
double dual_bound(const MilpModel& model, const std::vector<double>& y) {
  std::vector<double> reduced(model.num_vars(), 0.0);
  for (const Term& t : model.objective()) reduced[t.var] += t.coef;
  double z = model.objective_constant();
  for (int i = 0; i < model.num_rows(); ++i) {
    z += y[i] * model.rows()[i].rhs;
    for (const Term& t : model.rows()[i].terms) reduced[t.var] -= y[i] * t.coef;
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.variable(j);
    z += std::min(reduced[j] * v.lo, reduced[j] * v.hi);
  }
  return z;
}

}  // namespace

TEST_CASE("solve_lp on small textbook models") {
  SUBCASE("single active bound") {
    MilpModel m;
    const int x = m.add_continuous(0, 10, "x");
    m.add_row({{x, 1}}, RowSense::kGreaterEqual, 2);
    m.set_objective({{x, 1}});
    const auto sol = solve_lp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.values[0] == doctest::Approx(2.0));
  }
  SUBCASE("contradictory rows") {
    MilpModel m;
    const int x = m.add_continuous(-5, 5);
    m.add_row({{x, 1}}, RowSense::kGreaterEqual, 1);
    m.add_row({{x, 1}}, RowSense::kLessEqual, 0);
    m.set_objective({{x, 1}});
    CHECK(solve_lp(m).status == SolveStatus::kInfeasible);
  }
  SUBCASE("budget constraint binds under maximization") {
    MilpModel m;
    const int a = m.add_continuous(0, 1);
    const int b = m.add_continuous(0, 1);
    m.add_row({{a, 1}, {b, 1}}, RowSense::kLessEqual, 1);
    m.set_objective({{a, 1}, {b, 1}}, 0.0, ObjectiveSense::kMaximize);
    const auto sol = solve_lp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(1.0));
  }
  SUBCASE("equality rows and objective constant") {
    MilpModel m;
    const int a = m.add_continuous(-3, 3);
    const int b = m.add_continuous(-3, 3);
    m.add_row({{a, 1}, {b, -1}}, RowSense::kEqual, 1);
    m.set_objective({{a, 2}, {b, 1}}, 4.0);
    const auto sol = solve_lp(m);
    REQUIRE(sol.optimal());
    // a = b + 1, minimize 3b + 2 + 4 with b >= -3 -> b = -3.
    CHECK(sol.objective == doctest::Approx(-3.0));
  }
  SUBCASE("rejects binaries") {
    MilpModel m;
    m.add_binary();
    CHECK_THROWS_AS(solve_lp(m), ModelError);
  }
}

TEST_CASE("model validation") {
  MilpModel bad_index;
  bad_index.add_continuous(0, 1);
  bad_index.add_row({{3, 1.0}}, RowSense::kLessEqual, 1);
  CHECK_THROWS_AS(solve_lp(bad_index), ModelError);

  MilpModel nan_coef;
  nan_coef.add_continuous(0, 1);
  nan_coef.add_row({{0, std::nan("")}}, RowSense::kLessEqual, 1);
  CHECK_THROWS_AS(solve_lp(nan_coef), ModelError);

  MilpModel infinite_bound;
  infinite_bound.add_continuous(0, kInfinity);
  CHECK_THROWS_AS(solve_lp(infinite_bound), ModelError);

  MilpModel wide_binary;
  wide_binary.add_variable(0, 2, VarKind::kBinary);
  CHECK_THROWS_AS(solve_milp(wide_binary), ModelError);
}

TEST_CASE("solve_milp small cases") {
  SUBCASE("dominant coefficient") {
    MilpModel m;
    const int a = m.add_binary();
    const int b = m.add_binary();
    m.add_row({{a, 1}, {b, 1}}, RowSense::kLessEqual, 1);
    m.set_objective({{a, -3}, {b, -2}});
    const auto sol = solve_milp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(-3.0));
    CHECK(sol.values[a] == 1.0);
    CHECK(sol.values[b] == 0.0);
  }
  SUBCASE("no constraints") {
    MilpModel m;
    std::vector<Term> obj;
    for (int j = 0; j < 5; ++j) obj.push_back({m.add_binary(), 1.0});
    m.set_objective(obj);
    const auto sol = solve_milp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == 0.0);
    for (double v : sol.values) CHECK(v == 0.0);
  }
  SUBCASE("infeasible integer program with feasible relaxation") {
    MilpModel m;
    const int a = m.add_binary();
    const int b = m.add_binary();
    m.add_row({{a, 2}, {b, 2}}, RowSense::kEqual, 1);
    m.set_objective({{a, 1}});
    CHECK(solve_milp(m).status == SolveStatus::kInfeasible);
  }
  SUBCASE("mixed binary and continuous") {
    MilpModel m;
    const int y = m.add_binary();
    const int x = m.add_continuous(0, 10);
    m.add_row({{x, 1}, {y, -10}}, RowSense::kLessEqual, 0);
    m.add_row({{x, 1}}, RowSense::kGreaterEqual, 2.5);
    m.set_objective({{y, 7}, {x, 1}});
    const auto sol = solve_milp(m);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(9.5));
  }
}

TEST_CASE("solve_milp agrees with enumeration on random 6-variable models") {
  std::mt19937_64 rng(20240601);
  int feasible_count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    MilpModel m = random_binary_model(rng, 6, 4, false);
    bool feasible = false;
    const double expected = enumerate_binary_optimum(m, &feasible);
    const auto sol = solve_milp(m);
    if (!feasible) {
      CHECK(sol.status == SolveStatus::kInfeasible);
      continue;
    }
    ++feasible_count;
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(expected).epsilon(1e-9));
    CHECK(m.max_violation(sol.values) <= kFeasibilityTol);
  }
  CHECK(feasible_count > 50);
}

TEST_CASE("solve_milp agrees with enumeration up to 12 binaries") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 8 + trial % 5;
    MilpModel m = random_binary_model(rng, n, 3 + trial % 3, true);
    if (trial % 2) m.set_objective_sense(ObjectiveSense::kMaximize);
    bool feasible = false;
    const double expected = enumerate_binary_optimum(m, &feasible);
    const auto sol = solve_milp(m);
    if (!feasible) {
      CHECK(sol.status == SolveStatus::kInfeasible);
      continue;
    }
    REQUIRE(sol.optimal());
    CHECK(std::abs(sol.objective - expected) <= 1e-6);
  }
}

TEST_CASE("LP duals certify optimality") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    MilpModel m;
    const int n = 3 + trial % 6;
    for (int j = 0; j < n; ++j) m.add_continuous(-2 - std::abs(u(rng)), 2 + std::abs(u(rng)));
    for (int i = 0; i < 2 + trial % 5; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, u(rng)});
      const RowSense s = i % 3 == 0 ? RowSense::kGreaterEqual
                         : i % 3 == 1 ? RowSense::kLessEqual
                                      : RowSense::kEqual;
      m.add_row(terms, s, s == RowSense::kEqual ? 0.1 * u(rng) : u(rng));
    }
    std::vector<Term> obj;
    for (int j = 0; j < n; ++j) obj.push_back({j, u(rng)});
    m.set_objective(obj, u(rng));
    const auto sol = solve_lp(m);
    if (!sol.optimal()) continue;
    ++checked;
    CHECK(m.max_violation(sol.values) <= kFeasibilityTol);
    // Sign feasibility of the duals for a minimization problem.
    for (int i = 0; i < m.num_rows(); ++i) {
      if (m.rows()[i].sense == RowSense::kLessEqual) CHECK(sol.duals[i] <= 1e-9);
      if (m.rows()[i].sense == RowSense::kGreaterEqual) CHECK(sol.duals[i] >= -1e-9);
    }
    CHECK(std::abs(dual_bound(m, sol.duals) - sol.objective) <= 1e-7);
  }
  CHECK(checked > 20);
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    MilpModel m = random_binary_model(rng, 12, 5, true);
    const auto a = solve_milp(m);
    const auto b = solve_milp(m);
    CHECK(a.status == b.status);
    CHECK(a.node_count == b.node_count);
    if (a.optimal()) {
      CHECK(a.objective == b.objective);
      CHECK(a.values == b.values);
    }
  }
}

TEST_CASE("time limit returns TimeLimit status") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> w(10, 99);
  MilpModel m;
  std::vector<Term> cap, obj;
  for (int j = 0; j < 60; ++j) {
    m.add_binary();
    cap.push_back({j, static_cast<double>(w(rng))});
    obj.push_back({j, -static_cast<double>(w(rng))});
  }
  m.add_row(cap, RowSense::kLessEqual, 1000.5);
  m.set_objective(obj);
  SolveLimits limits;
  limits.time_limit = 0.0;
  const auto sol = solve_milp(m, limits);
  CHECK(sol.status == SolveStatus::kTimeLimit);
}

TEST_CASE("LP text export") {
  SUBCASE("smallest model") {
    MilpModel m;
    const int x = m.add_continuous(0, 10, "x");
    m.add_row({{x, 1}}, RowSense::kGreaterEqual, 2, "lb");
    m.set_objective({{x, 1}});
    const std::string text = export_lp_text(m);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
    CHECK(text.find("0 <= x <= 10") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
  }
  SUBCASE("equality rows are preserved") {
    MilpModel m;
    const int a = m.add_binary("a");
    const int b = m.add_binary("b");
    m.add_row({{a, 1}, {b, 1}}, RowSense::kEqual, 1, "pick");
    m.set_objective({{a, 2}, {b, 3}});
    const std::string text = export_lp_text(m);
    CHECK(text.find("pick: a + b = 1") != std::string::npos);
    CHECK(text.find("Binary") != std::string::npos);
  }
  SUBCASE("re-import reproduces the optimum") {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 100; ++trial) {
      MilpModel m = random_binary_model(rng, 6, 4, trial % 2 == 0);
      const MilpModel back = parse_lp_text(export_lp_text(m));
      CHECK(back.num_vars() == m.num_vars());
      CHECK(back.num_rows() == m.num_rows());
      bool feasible = false;
      const double expected = enumerate_binary_optimum(m, &feasible);
      const auto sol = solve_milp(back);
      if (!feasible) {
        CHECK(sol.status == SolveStatus::kInfeasible);
      } else {
        REQUIRE(sol.optimal());
        CHECK(sol.objective == doctest::Approx(expected));
      }
    }
  }
  SUBCASE("names that are not LP identifiers are sanitized") {
    MilpModel m;
    m.add_binary("y[0,1]");
    m.add_binary("y[0,1]");
    m.set_objective({{0, 1}, {1, -1}}, 2.5, ObjectiveSense::kMaximize);
    const MilpModel back = parse_lp_text(export_lp_text(m));
    CHECK(back.num_vars() == 2);
    CHECK(back.sense() == ObjectiveSense::kMaximize);
    CHECK(back.objective_constant() == 2.5);
  }
  SUBCASE("parse rejects infinite bounds") {
    CHECK_THROWS_AS(parse_lp_text("Minimize\n obj: x\nSubject To\n c: x >= 1\nEnd\n"),
                    ModelError);
  }
}
