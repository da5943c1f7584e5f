// Acceptance run: one PASS/FAIL line per criterion, with the measurements
// behind it. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kadapt/benders.hpp"
#include "kadapt/double_oracle.hpp"
#include "kadapt/instance.hpp"
#include "kadapt/oracle.hpp"

namespace {

using namespace kadapt;

constexpr const char* kFamilies[] = {"shortest-path", "knapsack", "generic"};
constexpr int kPerFamily = 20;
constexpr int kTinyDims = 5;  // shortest path |V| <= 6, knapsack n <= 8, generic n, m <= 5

// Knapsack instances with eight items can have a few hundred recourse points.
OracleBudget oracle_budget() {
  OracleBudget b;
  b.max_recourse_points = 256;
  b.max_k_subsets = 5000000;
  return b;
}

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Outcome {
  std::string name;
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// Checks every p-center and solution-generation solve against the direct
// max-min recomputation.
struct IdentityAudit {
  const KAdaptInstance* inst = nullptr;
  long checks = 0;
  long failures = 0;
  double worst = 0.0;

  void record(double milp_value, double direct) {
    ++checks;
    const double err = std::isinf(direct) ? milp::kInfinity : std::abs(milp_value - direct);
    worst = std::max(worst, err);
    if (!(err <= 1e-6)) ++failures;
  }

  void attach(SubproblemOptions& o) {
    o.on_p_center = [this](const SolutionPool& pool, const ScenarioPool& scen,
                           std::span<const double> x, const PCenterResult& pc) {
      if (pc.status != OracleStatus::kOptimal) return;
      std::vector<std::vector<double>> chosen;
      for (int j : pc.selected) chosen.push_back(pool[j]);
      record(pc.value, max_min_value(*inst, x, scen.scenarios(), chosen));
    };
    o.on_solution_generation = [this](const ScenarioPool& scen, std::span<const double> x,
                                      const SolutionGenResult& sg) {
      if (sg.status != OracleStatus::kOptimal) return;
      record(sg.value, max_min_value(*inst, x, scen.scenarios(), sg.recourses));
    };
  }
};

// Every cut must stay below the true second-stage value at every first stage.
struct CutAudit {
  long cuts = 0;
  long points = 0;
  long failures = 0;
  double worst = -milp::kInfinity;  // max over cuts and x of rhs(x) - nu(x)

  void check(const KAdaptInstance& inst, int K, const std::vector<OptimalityCut>& found) {
    cuts += static_cast<long>(found.size());
    if (found.empty()) return;
    for (const auto& x : enumerate_first_stage(inst)) {
      const double nu = second_stage_value(inst, x, K, oracle_budget()).value;
      ++points;
      if (std::isinf(nu)) continue;
      for (const auto& c : found) {
        const double excess = cut_rhs(c, x) - nu;
        worst = std::max(worst, excess);
        if (excess > 1e-6) ++failures;
      }
    }
  }
};

KPolicy solve_exact(const KAdaptInstance& inst, int K, IdentityAudit* identities,
                    std::vector<OptimalityCut>* cuts, std::vector<BendersTrace>* trace = nullptr) {
  SolverOptions o;
  o.K = K;
  o.epsilon = 0.0;
  o.time_limit = 600.0;
  if (identities != nullptr) {
    identities->inst = &inst;
    identities->attach(o.subproblem);
  }
  if (cuts != nullptr) o.on_optimality_cut = [cuts](const OptimalityCut& c) { cuts->push_back(c); };
  if (trace != nullptr) o.on_iteration = [trace](const BendersTrace& t) { trace->push_back(t); };
  return solve_any(inst, o);
}

// The tiny suite: kPerFamily instances per family, seeds fixed.
std::vector<KAdaptInstance> tiny_suite(Variant variant, int K) {
  std::vector<KAdaptInstance> out;
  for (int f = 0; f < 3; ++f) {
    for (int i = 0; i < kPerFamily; ++i) {
      out.push_back(generate_tiny(kFamilies[f], variant, kTinyDims, K, 1000 * (f + 1) + i));
    }
  }
  return out;
}

bool set_budget(KAdaptInstance& inst, double gamma) {
  Polytope& rows = inst.scenario_set.rows;
  for (int r = 0; r < rows.num_rows(); ++r) {
    if (rows.sense[r] != milp::RowSense::kLessEqual) continue;
    const auto coefs = rows.lhs.row(r);
    if (std::all_of(coefs.begin(), coefs.end(), [](double a) { return a == 0.0 || a == 1.0; })) {
      rows.rhs[r] = gamma;
      return true;
    }
  }
  return false;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Oracle equivalence, constraint-uncertainty reduction, oracle identities and
// cut validity share one pass over the tiny suite.
std::vector<Outcome> oracle_suite() {
  Outcome equivalence{"oracle equivalence"};
  Outcome reduction{"constraint-uncertainty reduction"};
  Outcome identity{"oracle identities"};
  Outcome validity{"cut validity"};
  IdentityAudit ids;
  CutAudit cut_audit;
  int compared = 0, mismatched = 0, infeasible = 0;
  int reduced = 0, reduced_mismatch = 0;
  double worst_eq = 0.0, worst_red = 0.0;
  const double t0 = now();
  for (int K = 1; K <= 3; ++K) {
    for (const KAdaptInstance& inst : tiny_suite(Variant::kObjective, K)) {
      std::vector<OptimalityCut> cuts;
      const KPolicy p = solve_exact(inst, K, &ids, &cuts);
      const OracleResult ref = brute_force_solve(inst, K, oracle_budget());
      ++compared;
      if (!ref.feasible) {
        ++infeasible;
        if (p.status != PolicyStatus::kInfeasible) ++mismatched;
      } else {
        const double err = std::abs(p.value - ref.value);
        worst_eq = std::max(worst_eq, err);
        if (p.status != PolicyStatus::kOptimal || !(err <= 1e-6)) {
          ++mismatched;
          std::printf("  mismatch %s K=%d solver=%.9g oracle=%.9g\n", inst.name.c_str(), K,
                      p.value, ref.value);
        }
      }
      cut_audit.check(inst, K, cuts);

      const KAdaptInstance zero = with_zero_constraint_uncertainty(inst);
      std::vector<OptimalityCut> zero_cuts;
      const KPolicy pz = solve_exact(zero, K, &ids, &zero_cuts);
      ++reduced;
      const bool same_status = pz.status == p.status;
      const double err = p.has_incumbent() ? std::abs(pz.value - p.value) : 0.0;
      if (p.has_incumbent()) worst_red = std::max(worst_red, err);
      if (!same_status || !(err <= 1e-6)) {
        ++reduced_mismatch;
        std::printf("  reduction mismatch %s K=%d objective=%.9g constraint=%.9g\n",
                    inst.name.c_str(), K, p.value, pz.value);
      }
    }
  }
  const double t_eq = now() - t0;

  // The constraint-uncertainty suite feeds the identity and cut audits too,
  // and is itself checked against the oracle.
  int cu_compared = 0, cu_mismatch = 0;
  for (int K = 1; K <= 3; ++K) {
    for (const KAdaptInstance& inst : tiny_suite(Variant::kConstraint, K)) {
      std::vector<OptimalityCut> cuts;
      const KPolicy p = solve_exact(inst, K, &ids, &cuts);
      const OracleResult ref = brute_force_solve(inst, K, oracle_budget());
      ++cu_compared;
      const bool ok = ref.feasible ? p.status == PolicyStatus::kOptimal &&
                                         std::abs(p.value - ref.value) <= 1e-6
                                   : p.status == PolicyStatus::kInfeasible;
      if (!ok) ++cu_mismatch;
      cut_audit.check(inst, K, cuts);
    }
  }

  equivalence.pass = mismatched == 0;
  equivalence.detail =
      fmt("%d/%d runs match (%d oracle-infeasible), max |diff| %.2e, %.1f s for the suite "
          "(both pipelines); constraint-variant suite %d/%d match",
          compared - mismatched, compared, infeasible, worst_eq, t_eq,
          cu_compared - cu_mismatch, cu_compared);
  reduction.pass = reduced_mismatch == 0;
  reduction.detail = fmt("%d/%d runs match with all W_l = 0, max |diff| %.2e",
                         reduced - reduced_mismatch, reduced, worst_red);
  identity.pass = ids.failures == 0 && ids.checks > 0;
  identity.detail = fmt("%ld oracle solves checked, %ld off, max |diff| %.2e", ids.checks,
                        ids.failures, ids.worst);
  validity.pass = cut_audit.failures == 0 && cut_audit.cuts > 0;
  validity.detail = fmt("%ld cuts against %ld first-stage points, %ld violations, max "
                        "rhs - nu %.2e",
                        cut_audit.cuts, cut_audit.points, cut_audit.failures, cut_audit.worst);
  return {equivalence, reduction, identity, validity};
}

Outcome monotonicity() {
  Outcome out{"monotonicity in K and budget"};
  int k_checks = 0, k_fail = 0, g_checks = 0, g_fail = 0;
  // K: values nonincreasing from 1 to 3.
  for (int i = 0; i < 10; ++i) {
    const KAdaptInstance inst = generate_tiny(kFamilies[i % 3], Variant::kObjective, 4, 1, 500 + i);
    double prev = milp::kInfinity;
    for (int K = 1; K <= 3; ++K) {
      const double v = solve_exact(inst, K, nullptr, nullptr).value;
      if (K > 1) {
        ++k_checks;
        if (v > prev + 1e-6) ++k_fail;
      }
      prev = v;
    }
  }
  // Budget: values nondecreasing from 0 to 2 on instances with a budget row.
  int found = 0;
  for (int seed = 0; found < 10 && seed < 100; ++seed) {
    const char* family = seed % 2 == 0 ? "shortest-path" : "generic";
    KAdaptInstance inst = generate_tiny(family, Variant::kObjective, 4, 2, 700 + seed);
    if (!set_budget(inst, 0.0)) continue;
    ++found;
    double prev = -milp::kInfinity;
    for (double gamma : {0.0, 1.0, 2.0}) {
      set_budget(inst, gamma);
      const double v = solve_exact(inst, 2, nullptr, nullptr).value;
      if (gamma > 0.0) {
        ++g_checks;
        if (v < prev - 1e-6) ++g_fail;
      }
      prev = v;
    }
  }
  out.pass = k_fail == 0 && g_fail == 0 && found == 10;
  out.detail = fmt("K steps %d/%d nonincreasing on 10 instances; budget steps %d/%d "
                   "nondecreasing on %d instances",
                   k_checks - k_fail, k_checks, g_checks - g_fail, g_checks, found);
  return out;
}

Outcome termination() {
  Outcome out{"termination bounds"};
  int runs = 0, unfinished = 0, scen_fail = 0, cut_fail = 0;
  double scen_ratio = 0.0, cut_ratio = 0.0;
  for (Variant variant : {Variant::kObjective, Variant::kConstraint}) {
    int used = 0;
    for (int seed = 0; used < 15 && seed < 400; ++seed) {
      const char* family = kFamilies[seed % 3];
      const KAdaptInstance inst = generate_tiny(family, variant, 4, 1, 3000 + seed);
      const int y_count =
          static_cast<int>(enumerate_feasible_binary(inst.recourse_set, inst.m).size());
      if (y_count > 8) continue;
      ++used;
      for (int K = 1; K <= 3; ++K) {
        std::vector<OptimalityCut> cuts;
        std::vector<BendersTrace> trace;
        const KPolicy p = solve_exact(inst, K, nullptr, &cuts, &trace);
        ++runs;
        if (p.status == PolicyStatus::kTimeLimit) ++unfinished;
        const std::int64_t subsets = binomial(y_count, std::min(K, y_count));
        for (const auto& t : trace) {
          scen_ratio = std::max(scen_ratio, double(t.subproblem_scenarios) / subsets);
          if (t.subproblem_scenarios > subsets) ++scen_fail;
        }
        const OracleResult ref = brute_force_solve(inst, K, oracle_budget());
        const std::int64_t points = ref.first_stage_points;
        if (points > 0) cut_ratio = std::max(cut_ratio, double(cuts.size()) / points);
        if (static_cast<std::int64_t>(cuts.size()) > points) ++cut_fail;
      }
    }
  }
  out.pass = unfinished == 0 && scen_fail == 0 && cut_fail == 0;
  out.detail = fmt("%d runs, %d unfinished; scenarios per subproblem <= C(|Y|,K) violated %d "
                   "times (max ratio %.2f); cuts <= |X cap V| violated %d times (max ratio %.2f)",
                   runs, unfinished, scen_fail, scen_ratio, cut_fail, cut_ratio);
  return out;
}

Outcome binary_expansion() {
  Outcome out{"binary expansion"};
  int runs = 0, fail = 0;
  SplitMix64 rng(42);
  for (int t = 0; t < 5; ++t) {
    KAdaptInstance inst;
    inst.name = "integer-toy-" + std::to_string(t);
    inst.n = 3;
    inst.m = 2;
    inst.q = 2;
    inst.integer_upper = {static_cast<int>(rng.uniform_int(1, 7)),
                          static_cast<int>(rng.uniform_int(1, 7)), 7};
    for (int i = 0; i < 3; ++i) inst.first_stage_cost.push_back(double(rng.uniform_int(-4, 4)));
    inst.recourse_cost = Matrix(2, 2);
    inst.recourse_cost(0, 0) = double(rng.uniform_int(1, 9));
    inst.recourse_cost(0, 1) = double(rng.uniform_int(1, 9));
    inst.recourse_cost(1, 0) = double(rng.uniform_int(0, 5));
    inst.recourse_cost(1, 1) = double(rng.uniform_int(0, 5));
    inst.first_stage_set = Polytope::empty(3);
    inst.first_stage_set.add_row(std::vector<double>{1, 1, 1}, milp::RowSense::kGreaterEqual, 3);
    inst.recourse_set = Polytope::empty(2);
    inst.recourse_set.add_row(std::vector<double>{1, 1}, milp::RowSense::kGreaterEqual, 1);
    // Large first stages rule out recourse 0, and very large ones every recourse.
    inst.coupling_first = Matrix(1, 3);
    inst.coupling_first(0, 0) = 1.0;
    inst.coupling_first(0, 1) = double(rng.uniform_int(0, 1));
    inst.coupling_recourse = Matrix(1, 2);
    inst.coupling_recourse(0, 0) = 4.0;
    inst.coupling_rhs = {8.0};
    inst.scenario_set.lo = {1.0, 0.0};
    inst.scenario_set.hi = {1.0, 1.0};
    inst.scenario_set.rows = Polytope::empty(2);
    inst.K = 1 + t % 2;
    validate(inst);
    SolverOptions o;
    o.K = inst.K;
    o.epsilon = 0.0;
    const KPolicy p = solve_any(inst, o);
    const OracleResult ref = brute_force_solve(inst, inst.K);
    ++runs;
    const bool ok = ref.feasible ? p.status == PolicyStatus::kOptimal && p.value == ref.value
                                 : p.status == PolicyStatus::kInfeasible;
    if (!ok) {
      ++fail;
      std::printf("  integer mismatch %s solver=%.17g oracle=%.17g\n", inst.name.c_str(),
                  p.value, ref.value);
    }
  }
  out.pass = fail == 0;
  out.detail = fmt("%d/%d integer toy instances (3 variables, bounds <= 7) equal exactly",
                   runs - fail, runs);
  return out;
}

Outcome first_stage_uncertainty() {
  Outcome out{"first-stage objective uncertainty"};
  int box_points = 0, box_fail = 0;
  double box_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KAdaptInstance inst = generate_tiny("generic", Variant::kObjective, 3, 1, 900 + seed);
    FirstStageUncertainty fs;
    SplitMix64 rng(seed + 17);
    const int d = 2 + static_cast<int>(seed % 3);
    fs.cost_map = Matrix(d, inst.n);
    for (int l = 0; l < d; ++l) {
      for (int i = 0; i < inst.n; ++i) fs.cost_map(l, i) = rng.uniform(-5, 5);
    }
    fs.omega.rows = Polytope::empty(d);
    fs.omega.lo.assign(d, 0.0);
    fs.omega.hi.assign(d, 1.0);
    inst.first_stage_uncertainty = fs;
    for (const auto& x : enumerate_first_stage(inst)) {
      double analytic = 0.0;
      for (double v : fs.cost_map.multiply(x)) analytic += std::max(0.0, v);
      const double err = std::abs(dualized_first_stage_term(inst, x) - analytic);
      ++box_points;
      box_worst = std::max(box_worst, err);
      if (!(err <= 1e-7)) ++box_fail;
    }
  }
  int lifted = 0, lifted_fail = 0;
  double lifted_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    KAdaptInstance inst = generate_tiny("generic", Variant::kObjective, 3, 2, 950 + seed);
    if (inst.n != 3) {
      // Pad to exactly three first-stage variables by regenerating.
      for (std::uint64_t s = 1; inst.n != 3 && s < 200; ++s) {
        inst = generate_tiny("generic", Variant::kObjective, 3, 2, 950 + seed + 1000 * s);
      }
    }
    FirstStageUncertainty fs;
    fs.dependent = true;
    fs.cost_map = Matrix(inst.q, inst.n);
    SplitMix64 rng(seed + 100);
    for (int i = 0; i < inst.n; ++i) fs.cost_map(1 + i % (inst.q - 1), i) = rng.uniform(-4, 4);
    inst.first_stage_uncertainty = fs;
    validate(inst);
    for (int K = 1; K <= 2; ++K) {
      const KPolicy p = solve_exact(inst, K, nullptr, nullptr);
      const OracleResult ref = brute_force_solve(inst, K, oracle_budget());
      ++lifted;
      const double err = std::abs(p.value - ref.value);
      lifted_worst = std::max(lifted_worst, err);
      if (!ref.feasible || !(err <= 1e-6)) ++lifted_fail;
    }
  }
  out.pass = box_fail == 0 && lifted_fail == 0;
  out.detail = fmt("box dual term matches sum max(0, Cx) at %d points (max err %.2e, %d off); "
                   "lifted instances %d/%d match enumeration (max |diff| %.2e)",
                   box_points, box_worst, box_fail, lifted - lifted_fail, lifted, lifted_worst);
  return out;
}

Outcome shortest_path_benchmark() {
  Outcome out{"scaled shortest-path benchmark"};
  std::vector<double> times;
  int solved = 0;
  const int count = 10;
  for (int seed = 1; seed <= count; ++seed) {
    ShortestPathParams params;
    params.num_nodes = 20;
    params.gamma = 3;
    params.K = 2;
    const KAdaptInstance inst = generate_shortest_path(params, seed);
    SolverOptions o;
    o.K = 2;
    o.epsilon = 0.05;
    o.time_limit = 600.0;
    const KPolicy p = solve(inst, o);
    times.push_back(p.stats.wall_time);
    if (p.status == PolicyStatus::kOptimal) ++solved;
    std::printf("  |V|=20 Gamma=3 K=2 seed %d: %s value %.4f gap %.4f time %.3f s\n", seed,
                std::string(to_string(p.status)).c_str(), p.value, p.gap, p.stats.wall_time);
  }
  double mean = 0.0;
  for (double t : times) mean += t;
  mean /= times.size();
  out.pass = solved == count;
  out.detail = fmt("%d/%d solved to 5%% within 600 s, mean %.3f s, max %.3f s", solved, count,
                   mean, *std::max_element(times.begin(), times.end()));
  return out;
}

Outcome determinism() {
  Outcome out{"determinism"};
  std::vector<KAdaptInstance> cases;
  ShortestPathParams sp;
  sp.num_nodes = 20;
  sp.gamma = 3;
  cases.push_back(generate_shortest_path(sp, 1));
  KnapsackParams kp;
  kp.items = 20;
  cases.push_back(generate_knapsack(kp, 2));
  cases.push_back(generate_tiny("generic", Variant::kConstraint, 5, 2, 77));
  int same = 0;
  bool bytes_same = true;
  for (const auto& inst : cases) {
    const KAdaptInstance again = [&] {
      if (inst.family == "shortest-path") return generate_shortest_path(sp, 1);
      if (inst.family == "knapsack") return generate_knapsack(kp, 2);
      return generate_tiny("generic", Variant::kConstraint, 5, 2, 77);
    }();
    bytes_same = bytes_same && instance_to_json_text(inst) == instance_to_json_text(again);
    SolverOptions o;
    o.time_limit = 600.0;
    const KPolicy a = solve(inst, o);
    const KPolicy b = solve(again, o);
    bool equal = a.status == b.status && a.value == b.value && a.x == b.x &&
                 a.recourses == b.recourses && a.trace.size() == b.trace.size();
    for (size_t t = 0; equal && t < a.trace.size(); ++t) {
      equal = a.trace[t].ub == b.trace[t].ub && a.trace[t].lb == b.trace[t].lb &&
              a.trace[t].scenarios == b.trace[t].scenarios &&
              a.trace[t].pool_size == b.trace[t].pool_size;
    }
    same += equal;
  }
  out.pass = bytes_same && same == static_cast<int>(cases.size());
  out.detail = fmt("%d/%zu instances reproduce values and traces; generated bytes %s", same,
                   cases.size(), bytes_same ? "identical" : "differ");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<std::vector<Outcome>()>>> steps = {
      {"oracle", [] { return oracle_suite(); }},
      {"monotonicity", [] { return std::vector<Outcome>{monotonicity()}; }},
      {"termination", [] { return std::vector<Outcome>{termination()}; }},
      {"binary_expansion", [] { return std::vector<Outcome>{binary_expansion()}; }},
      {"first_stage_uncertainty", [] { return std::vector<Outcome>{first_stage_uncertainty()}; }},
      {"shortest_path_benchmark", [] { return std::vector<Outcome>{shortest_path_benchmark()}; }},
      {"determinism", [] { return std::vector<Outcome>{determinism()}; }},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  int ran = 0;
  for (const auto& [name, step] : steps) {
    if (!only.empty() && only != name) continue;
    ++ran;
    std::vector<Outcome> outcomes;
    try {
      outcomes = step();
    } catch (const std::exception& e) {
      outcomes = {Outcome{name, false, std::string("exception: ") + e.what()}};
    }
    for (const Outcome& o : outcomes) {
      std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", o.name.c_str(), o.detail.c_str());
      std::fflush(stdout);
      failed += !o.pass;
    }
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown step '%s'\n", only.c_str());
    return 1;
  }
  return failed == 0 ? 0 : 1;
}
