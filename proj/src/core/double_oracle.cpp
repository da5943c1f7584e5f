#include "kadapt/double_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "core/model_util.hpp"
#include "core/double_oracle_internal.hpp"
#include "kadapt/constraint_uncertainty.hpp"

namespace kadapt {

using milp::MilpModel;
using milp::ObjectiveSense;
using milp::RowSense;
using milp::SolveStatus;
using milp::Term;

namespace {

OracleStatus oracle_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return OracleStatus::kOptimal;
    case SolveStatus::kTimeLimit:
      return OracleStatus::kTimeLimit;
    default:
      return OracleStatus::kInfeasible;
  }
}

// Q'xi, the cost of each recourse coordinate under scenario xi.
std::vector<double> cost_row(const KAdaptInstance& inst, std::span<const double> xi) {
  return inst.recourse_cost.multiply_transposed(xi);
}

bool converged(double ub, double lb, double epsilon) {
  if (!std::isfinite(ub)) return false;
  const double scale = std::max(1.0, std::abs(ub));
  return ub - lb <= std::max(epsilon, 1e-9) * scale;
}

std::vector<std::vector<double>> pick(const SolutionPool& pool, const std::vector<int>& idx) {
  std::vector<std::vector<double>> out;
  for (int j : idx) out.push_back(pool[j]);
  return out;
}

// Adds the assignment block shared by both solution-generation models:
// u_kh for k <= h (a relabelling argument makes the rest redundant) with
// sum_k u_kh = 1. Returns u indices, -1 where a pair is excluded.
std::vector<std::vector<int>> add_assignment_block(MilpModel& model, int K, int H) {
  std::vector<std::vector<int>> u(K, std::vector<int>(H, -1));
  for (int h = 0; h < H; ++h) {
    std::vector<Term> one;
    for (int k = 0; k <= std::min(h, K - 1); ++k) {
      u[k][h] = model.add_binary();
      one.push_back({u[k][h], 1.0});
    }
    model.add_row(std::move(one), RowSense::kEqual, 1.0);
  }
  return u;
}

// gamma >= xi_h'Q y^k whenever u_kh = 1. Returns the gamma index.
int add_epigraph_block(MilpModel& model, const KAdaptInstance& inst, const ScenarioPool& scen,
                       const std::vector<int>& copies, const std::vector<std::vector<int>>& u) {
  const int H = scen.size();
  std::vector<std::vector<double>> a(H);
  std::vector<internal::Interval> range(H);
  double max_lo = -milp::kInfinity, max_hi = -milp::kInfinity;
  for (int h = 0; h < H; ++h) {
    a[h] = cost_row(inst, scen[h]);
    for (double v : a[h]) {
      range[h].lo += std::min(0.0, v);
      range[h].hi += std::max(0.0, v);
    }
    max_lo = std::max(max_lo, range[h].lo);
    max_hi = std::max(max_hi, range[h].hi);
  }
  const double gamma_lo = max_lo - 1.0;
  const int gamma = model.add_continuous(gamma_lo, max_hi + 1.0);
  for (int h = 0; h < H; ++h) {
    const double big_m = range[h].hi - gamma_lo;
    for (size_t k = 0; k < copies.size(); ++k) {
      if (u[k][h] < 0) continue;
      // gamma - a_h'y^k - M u_kh >= -M
      std::vector<Term> terms{{gamma, 1.0}, {u[k][h], -big_m}};
      for (int j = 0; j < inst.m; ++j) {
        if (a[h][j] != 0.0) terms.push_back({copies[k] + j, -a[h][j]});
      }
      model.add_row(std::move(terms), RowSense::kGreaterEqual, -big_m);
    }
  }
  model.set_objective({{gamma, 1.0}});
  return gamma;
}

}  // namespace

namespace internal {

std::vector<std::vector<int>> assignment_block(MilpModel& model, int K, int H) {
  return add_assignment_block(model, K, H);
}

int epigraph_block(MilpModel& model, const KAdaptInstance& inst, const ScenarioPool& scen,
                   const std::vector<int>& copies, const std::vector<std::vector<int>>& u) {
  return add_epigraph_block(model, inst, scen, copies, u);
}

void add_assigned_coupling_rows(MilpModel& model, const KAdaptInstance& inst,
                                std::span<const double> x, int x_first, const ScenarioPool& scen,
                                const std::vector<int>& copies,
                                const std::vector<std::vector<int>>& u) {
  // [T_i x] + W(xi_h)_i y^k <= threshold_i + M (1 - u_kh)
  const std::vector<double> rhs =
      x_first >= 0 ? inst.coupling_rhs : recourse_rhs(inst, x);
  for (int h = 0; h < scen.size(); ++h) {
    const Matrix w = coupling_at(inst, scen[h]);
    for (int i = 0; i < inst.s(); ++i) {
      const double limit = feasibility_threshold(inst, i, rhs[i]);
      double reach = 0.0;
      for (int j = 0; j < inst.m; ++j) reach += std::max(0.0, w(i, j));
      if (x_first >= 0) {
        for (int j = 0; j < inst.n; ++j) reach += std::max(0.0, inst.coupling_first(i, j));
      }
      if (reach <= limit) continue;
      const double big_m = reach - limit + 1.0;
      for (int k = 0; k < static_cast<int>(copies.size()); ++k) {
        if (u[k][h] < 0) continue;
        std::vector<Term> terms{{u[k][h], big_m}};
        if (x_first >= 0) {
          for (int j = 0; j < inst.n; ++j) {
            if (inst.coupling_first(i, j) != 0.0) {
              terms.push_back({x_first + j, inst.coupling_first(i, j)});
            }
          }
        }
        for (int j = 0; j < inst.m; ++j) {
          if (w(i, j) != 0.0) terms.push_back({copies[k] + j, w(i, j)});
        }
        model.add_row(std::move(terms), RowSense::kLessEqual, limit + big_m);
      }
    }
  }
}

ScenarioFloor scenario_floor(const KAdaptInstance& inst, std::span<const double> x,
                             std::span<const double> xi, double time_limit) {
  const std::vector<double> rhs = recourse_rhs(inst, x);
  MilpModel model;
  int y;
  if (inst.variant == Variant::kObjective) {
    y = add_recourse_copy(model, inst, rhs);
  } else {
    y = add_binaries(model, inst.m);
    add_polytope_rows(model, inst.recourse_set, y);
    const Matrix w = coupling_at(inst, xi);
    for (int i = 0; i < inst.s(); ++i) {
      add_dense_row(model, w.row(i), y, RowSense::kLessEqual,
                    feasibility_threshold(inst, i, rhs[i]));
    }
  }
  std::vector<Term> objective;
  const std::vector<double> a = cost_row(inst, xi);
  for (int j = 0; j < inst.m; ++j) {
    if (a[j] != 0.0) objective.push_back({y + j, a[j]});
  }
  model.set_objective(std::move(objective));
  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  const milp::MilpSolution sol = milp::solve_milp(model, limits);
  ScenarioFloor floor;
  floor.status = oracle_status(sol.status);
  if (floor.status == OracleStatus::kOptimal) {
    floor.value = sol.objective;
    floor.y = binary_block(sol.values, y, inst.m);
  }
  return floor;
}

SolutionGenResult generate_solutions_impl(const ScenarioPool& scen, const KAdaptInstance& inst,
                                          std::span<const double> x, int K,
                                          const milp::SolveLimits& limits, FloorCache* cache) {
  if (scen.empty()) throw ModelError("solution generation needs at least one scenario");
  if (K < 1) throw ModelError("K must be positive");
  const Deadline deadline(limits.time_limit);
  const int H = scen.size();
  SolutionGenResult result;

  // Each scenario costs at least its own best recourse; an unusable scenario
  // rules out every K-subset.
  FloorCache local;
  FloorCache& floors = cache != nullptr ? *cache : local;
  double floor_max = -milp::kInfinity;
  for (int h = 0; h < H; ++h) {
    if (h >= static_cast<int>(floors.floors.size())) {
      floors.floors.push_back(scenario_floor(inst, x, scen[h], deadline.remaining()));
    }
    const ScenarioFloor& f = floors.floors[h];
    if (f.status == OracleStatus::kTimeLimit) floors.floors.pop_back();
    if (f.status != OracleStatus::kOptimal) {
      result.status = f.status;
      return result;
    }
    floor_max = std::max(floor_max, f.value);
  }
  if (H <= K) {
    // Every scenario gets its own best recourse.
    for (int h = 0; h < K; ++h) result.recourses.push_back(floors.floors[std::min(h, H - 1)].y);
    for (int h = 0; h < H; ++h) result.assignment.push_back(h);
    result.value = result.bound = floor_max;
    return result;
  }

  const std::vector<double> rhs = recourse_rhs(inst, x);
  const bool cu = inst.variant == Variant::kConstraint;
  MilpModel model;
  std::vector<int> copies;
  for (int k = 0; k < K; ++k) {
    if (cu) {
      copies.push_back(add_binaries(model, inst.m));
      add_polytope_rows(model, inst.recourse_set, copies.back());
    } else {
      copies.push_back(add_recourse_copy(model, inst, rhs));
    }
  }
  const auto u = add_assignment_block(model, K, H);
  const int gamma = add_epigraph_block(model, inst, scen, copies, u);
  if (cu) add_assigned_coupling_rows(model, inst, x, -1, scen, copies, u);
  const milp::Variable& g = model.variable(gamma);
  model.set_bounds(gamma, std::max(g.lo, floor_max), std::max(g.hi, floor_max));

  milp::SolveLimits sub = limits;
  sub.time_limit = deadline.remaining();
  const milp::MilpSolution sol = milp::solve_milp(model, sub);
  result.nodes = sol.node_count;
  result.status = oracle_status(sol.status);
  if (result.status != OracleStatus::kOptimal) return result;
  result.value = sol.objective;
  result.bound = std::min(sol.objective, std::max(sol.bound, floor_max));
  for (int first : copies) result.recourses.push_back(binary_block(sol.values, first, inst.m));
  result.assignment.assign(H, 0);
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < K; ++k) {
      if (u[k][h] >= 0 && sol.values[u[k][h]] > 0.5) result.assignment[h] = k;
    }
  }
  return result;
}

PCenterResult solve_p_center_masked(const SolutionPool& pool, const ScenarioPool& scen,
                                    const KAdaptInstance& inst, int K,
                                    const std::vector<std::vector<char>>* allowed,
                                    double time_limit) {
  const int J = pool.size(), H = scen.size();
  if (K < 1 || J < K) {
    throw ModelError("p-center needs a pool of at least K = " + std::to_string(K) +
                     " solutions, got " + std::to_string(J));
  }
  if (H < 1) throw ModelError("p-center needs at least one scenario");
  auto ok = [&](int j, int h) { return allowed == nullptr || (*allowed)[j][h]; };

  std::vector<std::vector<double>> cost(J, std::vector<double>(H));
  for (int j = 0; j < J; ++j) {
    const std::vector<double> v = recourse_cost_vector(inst, pool[j]);
    for (int h = 0; h < H; ++h) {
      double c = 0.0;
      for (int l = 0; l < inst.q; ++l) c += scen[h][l] * v[l];
      cost[j][h] = c;
    }
  }

  PCenterResult result;
  // w is at least the best single cost of every scenario.
  double w_lo = -milp::kInfinity, w_hi = -milp::kInfinity;
  for (int h = 0; h < H; ++h) {
    double best = milp::kInfinity;
    for (int j = 0; j < J; ++j) {
      if (!ok(j, h)) continue;
      best = std::min(best, cost[j][h]);
      w_hi = std::max(w_hi, cost[j][h]);
    }
    if (!std::isfinite(best)) {
      result.status = OracleStatus::kInfeasible;
      return result;
    }
    w_lo = std::max(w_lo, best);
  }

  MilpModel model;
  const int z = internal::add_binaries(model, J);
  const int w = model.add_continuous(w_lo, w_hi);
  std::vector<Term> count;
  for (int j = 0; j < J; ++j) count.push_back({z + j, 1.0});
  model.add_row(std::move(count), RowSense::kEqual, K);
  std::vector<std::vector<int>> v(J, std::vector<int>(H, -1));
  for (int h = 0; h < H; ++h) {
    std::vector<Term> assign;
    std::vector<Term> epi{{w, 1.0}};
    for (int j = 0; j < J; ++j) {
      if (!ok(j, h)) continue;
      v[j][h] = model.add_continuous(0.0, 1.0);
      assign.push_back({v[j][h], 1.0});
      if (cost[j][h] != 0.0) epi.push_back({v[j][h], -cost[j][h]});
      model.add_row({{v[j][h], 1.0}, {z + j, -1.0}}, RowSense::kLessEqual, 0.0);
    }
    model.add_row(std::move(assign), RowSense::kEqual, 1.0);
    model.add_row(std::move(epi), RowSense::kGreaterEqual, 0.0);
  }
  model.set_objective({{w, 1.0}});

  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  const milp::MilpSolution sol = milp::solve_milp(model, limits);
  result.nodes = sol.node_count;
  result.status = oracle_status(sol.status);
  if (result.status != OracleStatus::kOptimal) return result;
  result.value = sol.objective;
  for (int j = 0; j < J; ++j) {
    if (sol.values[z + j] > 0.5) result.selected.push_back(j);
  }
  result.assignment.assign(H, -1);
  for (int h = 0; h < H; ++h) {
    double best = milp::kInfinity;
    for (int j : result.selected) {
      if (ok(j, h) && cost[j][h] < best) {
        best = cost[j][h];
        result.assignment[h] = j;
      }
    }
  }
  return result;
}

}  // namespace internal

bool ScenarioPool::add(std::vector<double> xi) {
  for (const auto& s : scenarios_) {
    double d = 0.0;
    for (size_t l = 0; l < s.size(); ++l) d = std::max(d, std::abs(s[l] - xi[l]));
    if (d <= kDuplicateTol) return false;
  }
  scenarios_.push_back(std::move(xi));
  return true;
}

int SolutionPool::add(std::vector<double> y) {
  const int j = find(y);
  if (j >= 0) return j;
  solutions_.push_back(std::move(y));
  return size() - 1;
}

int SolutionPool::find(const std::vector<double>& y) const {
  const auto it = std::find(solutions_.begin(), solutions_.end(), y);
  return it == solutions_.end() ? -1 : static_cast<int>(it - solutions_.begin());
}

void SolutionPool::filter(const std::function<bool(const std::vector<double>&)>& keep) {
  std::erase_if(solutions_, [&](const std::vector<double>& y) { return !keep(y); });
}

double assignment_cost(const KAdaptInstance& inst, std::span<const double> xi,
                       std::span<const double> y) {
  return scenario_cost(inst, xi, y);
}

double max_min_value(const KAdaptInstance& inst, std::span<const double> x,
                     std::span<const std::vector<double>> scenarios,
                     std::span<const std::vector<double>> recourses) {
  const bool cu = inst.variant == Variant::kConstraint;
  double worst = -milp::kInfinity;
  for (const auto& xi : scenarios) {
    double best = milp::kInfinity;
    for (const auto& y : recourses) {
      if (cu && recourse_violated(inst, x, y, xi)) continue;
      best = std::min(best, scenario_cost(inst, xi, y));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

PCenterResult solve_p_center(const SolutionPool& pool, const ScenarioPool& scen,
                             const KAdaptInstance& inst, std::span<const double> /*x*/, int K,
                             double time_limit) {
  return internal::solve_p_center_masked(pool, scen, inst, K, nullptr, time_limit);
}

ScenarioResult generate_scenario(std::span<const std::vector<double>> recourses,
                                 const KAdaptInstance& inst, double time_limit) {
  if (recourses.empty()) throw ModelError("scenario generation needs at least one recourse");
  const UncertaintySet& set = inst.scenario_set;
  MilpModel model;
  const int xi = internal::add_scenario_block(model, set);
  std::vector<std::vector<double>> costs;
  double lo = milp::kInfinity, hi = milp::kInfinity;
  for (const auto& y : recourses) {
    std::vector<double> v = recourse_cost_vector(inst, y);
    if (std::find(costs.begin(), costs.end(), v) != costs.end()) continue;
    const internal::Interval r = internal::linear_range(v, set.lo, set.hi);
    lo = std::min(lo, r.lo);
    hi = std::min(hi, r.hi);
    costs.push_back(std::move(v));
  }
  const int eta = model.add_continuous(lo - 1.0, hi + 1.0);
  for (const auto& v : costs) {
    std::vector<Term> terms{{eta, 1.0}};
    for (int l = 0; l < inst.q; ++l) {
      if (v[l] != 0.0) terms.push_back({xi + l, -v[l]});
    }
    model.add_row(std::move(terms), RowSense::kLessEqual, 0.0);
  }
  model.set_objective({{eta, 1.0}}, 0.0, ObjectiveSense::kMaximize);
  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  const milp::MilpSolution sol = milp::solve_lp(model, limits);
  ScenarioResult result;
  result.status = oracle_status(sol.status);
  if (sol.status == SolveStatus::kInfeasible) throw ModelError("uncertainty set is empty");
  if (result.status != OracleStatus::kOptimal) return result;
  result.value = sol.objective;
  result.xi.resize(inst.q);
  for (int l = 0; l < inst.q; ++l) {
    result.xi[l] = std::clamp(sol.values[xi + l], set.lo[l], set.hi[l]);
  }
  return result;
}

SolutionGenResult generate_solutions(const ScenarioPool& scen, const KAdaptInstance& inst,
                                     std::span<const double> x, int K, double time_limit) {
  if (inst.variant != Variant::kObjective) {
    throw ModelError("generate_solutions expects the objective variant");
  }
  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  return internal::generate_solutions_impl(scen, inst, x, K, limits, nullptr);
}

InnerLoopResult run_inner_loop(const SolutionPool& pool, ScenarioPool& scen,
                               const KAdaptInstance& inst, std::span<const double> x, int K,
                               const SubproblemOptions& options) {
  const internal::Deadline deadline(options.time_limit);
  const bool cu = inst.variant == Variant::kConstraint;
  InnerLoopResult result;
  while (result.iterations < options.max_iterations) {
    if (deadline.expired()) {
      result.status = OracleStatus::kTimeLimit;
      return result;
    }
    const PCenterResult pc = cu ? solve_p_center_cu(pool, scen, inst, x, K, deadline.remaining())
                                : solve_p_center(pool, scen, inst, x, K, deadline.remaining());
    result.nodes += pc.nodes;
    if (options.on_p_center) options.on_p_center(pool, scen, x, pc);
    if (pc.status != OracleStatus::kOptimal) {
      result.status = pc.status;
      return result;
    }
    const std::vector<std::vector<double>> chosen = pick(pool, pc.selected);
    const ScenarioResult sc = cu ? generate_scenario_cu(chosen, inst, x, deadline.remaining())
                                 : generate_scenario(chosen, inst, deadline.remaining());
    result.nodes += sc.nodes;
    if (options.on_scenario) options.on_scenario(chosen, sc);
    if (sc.status != OracleStatus::kOptimal) {
      result.status = sc.status;
      return result;
    }
    ++result.iterations;
    result.selected = pc.selected;
    const bool beaten = sc.kills_all || sc.value > pc.value + options.scenario_tolerance;
    if (beaten && scen.add(sc.xi)) {
      ++result.scenarios_added;
      continue;
    }
    // A beaten p-center value with a scenario already in the pool can only
    // come from round-off; the chosen recourses are evaluated either way.
    result.status = OracleStatus::kOptimal;
    result.ub = sc.kills_all ? milp::kInfinity : std::max(sc.value, pc.value);
    return result;
  }
  result.status = OracleStatus::kTimeLimit;
  return result;
}

ScenarioPool initial_scenario_pool(const KAdaptInstance& inst) {
  ScenarioPool pool;
  pool.add(nominal_scenario(inst));
  return pool;
}

SolutionPool initial_solution_pool(const KAdaptInstance& inst, std::span<const double> x, int K,
                                   const std::vector<double>& nominal) {
  const bool cu = inst.variant == Variant::kConstraint;
  const std::vector<double> rhs = recourse_rhs(inst, x);
  const std::vector<double> a = cost_row(inst, nominal);
  SolutionPool pool;
  std::vector<std::vector<double>> found;
  // Under constraint uncertainty the first pass keeps recourses usable at the
  // nominal scenario; a second pass fills up with any member of Y_poly.
  for (int pass = 0; pass < (cu ? 2 : 1) && pool.size() < K; ++pass) {
    MilpModel model;
    const int y = internal::add_binaries(model, inst.m);
    internal::add_polytope_rows(model, inst.recourse_set, y);
    if (!cu) {
      for (int i = 0; i < inst.s(); ++i) {
        internal::add_dense_row(model, inst.coupling_recourse.row(i), y, RowSense::kLessEqual,
                                rhs[i]);
      }
    } else if (pass == 0) {
      const Matrix w = coupling_at(inst, nominal);
      for (int i = 0; i < inst.s(); ++i) {
        internal::add_dense_row(model, w.row(i), y, RowSense::kLessEqual,
                                internal::feasibility_threshold(inst, i, rhs[i]));
      }
    }
    model.set_objective([&] {
      std::vector<Term> obj;
      for (int j = 0; j < inst.m; ++j) {
        if (a[j] != 0.0) obj.push_back({y + j, a[j]});
      }
      return obj;
    }());
    auto exclude = [&](const std::vector<double>& p) {
      std::vector<Term> terms;
      double ones = 0.0;
      for (int j = 0; j < inst.m; ++j) {
        terms.push_back({y + j, p[j] > 0.5 ? -1.0 : 1.0});
        ones += p[j] > 0.5;
      }
      model.add_row(std::move(terms), RowSense::kGreaterEqual, 1.0 - ones);
    };
    for (int j = 0; j < pool.size(); ++j) exclude(pool[j]);
    while (pool.size() < K) {
      const milp::MilpSolution sol = milp::solve_milp(model);
      if (!sol.optimal()) break;
      std::vector<double> p = internal::binary_block(sol.values, y, inst.m);
      exclude(p);
      pool.add(std::move(p));
      if (inst.m == 0) break;
    }
  }
  return pool;
}

SubproblemResult solve_subproblem(const KAdaptInstance& inst, std::span<const double> x, int K,
                                  const SubproblemOptions& options,
                                  const ScenarioPool* warm_scenarios,
                                  const SolutionPool* warm_solutions) {
  if (K < 1) throw ModelError("K must be positive");
  const internal::Deadline deadline(options.time_limit);
  const bool cu = inst.variant == Variant::kConstraint;
  SubproblemResult res;
  const std::vector<double> nominal = nominal_scenario(inst);
  if (warm_scenarios != nullptr) res.scenarios = *warm_scenarios;
  res.scenarios.add(nominal);
  res.solutions = initial_solution_pool(inst, x, K, nominal);
  if (res.solutions.empty()) {
    res.status = OracleStatus::kInfeasible;
    return res;
  }
  const int k_eff = std::min(K, res.solutions.size());
  res.effective_K = k_eff;
  if (warm_solutions != nullptr) {
    for (const auto& y : warm_solutions->solutions()) {
      if (cu ? inst.recourse_set.violation(y) <= milp::kFeasibilityTol
             : recourse_feasible(inst, x, y)) {
        res.solutions.add(y);
      }
    }
  }

  SubproblemOptions inner = options;
  internal::FloorCache floors;
  while (res.outer_iterations < options.max_iterations) {
    ++res.outer_iterations;
    inner.time_limit = deadline.remaining();
    const InnerLoopResult il = run_inner_loop(res.solutions, res.scenarios, inst, x, k_eff, inner);
    res.inner_iterations += il.iterations;
    res.scenarios_added += il.scenarios_added;
    res.nodes += il.nodes;
    if (il.status == OracleStatus::kTimeLimit) {
      res.status = OracleStatus::kTimeLimit;
      return res;
    }
    if (il.status == OracleStatus::kOptimal && il.ub < res.ub) {
      res.ub = il.ub;
      res.recourses = pick(res.solutions, il.selected);
    }
    auto record = [&] {
      SubproblemTrace t{res.outer_iterations, res.ub, res.lb, res.scenarios.size(),
                        res.solutions.size(), res.nodes};
      res.trace.push_back(t);
      if (options.on_trace) options.on_trace(t);
    };
    if (converged(res.ub, res.lb, options.epsilon)) {
      record();
      break;
    }

    milp::SolveLimits sg_limits;
    sg_limits.time_limit = deadline.remaining();
    sg_limits.relative_gap = 0.5 * options.epsilon;
    const SolutionGenResult sg =
        internal::generate_solutions_impl(res.scenarios, inst, x, k_eff, sg_limits, &floors);
    res.nodes += sg.nodes;
    if (options.on_solution_generation) options.on_solution_generation(res.scenarios, x, sg);
    if (sg.status == OracleStatus::kInfeasible) {
      res.status = OracleStatus::kInfeasible;
      res.ub = milp::kInfinity;
      res.recourses.clear();
      record();
      return res;
    }
    if (sg.status == OracleStatus::kTimeLimit) {
      res.status = OracleStatus::kTimeLimit;
      return res;
    }
    res.lb = std::max(res.lb, sg.bound);
    int added = 0;
    for (const auto& y : sg.recourses) {
      if (res.solutions.find(y) < 0) {
        res.solutions.add(y);
        ++added;
      }
    }
    record();
    // Without new recourses the next p-center can do no better than the
    // current one, whose value already matches the lower bound.
    if (converged(res.ub, res.lb, options.epsilon) || added == 0) break;
  }
  if (!std::isfinite(res.ub)) res.status = OracleStatus::kInfeasible;
  return res;
}

}  // namespace kadapt
