#include "kadapt/constraint_uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "core/double_oracle_internal.hpp"
#include "core/model_util.hpp"

namespace kadapt {

using milp::MilpModel;
using milp::ObjectiveSense;
using milp::RowSense;
using milp::SolveStatus;
using milp::Term;

bool recourse_violated(const KAdaptInstance& inst, std::span<const double> x,
                       std::span<const double> y, std::span<const double> xi) {
  if (inst.s() == 0) return false;
  const std::vector<double> rhs = recourse_rhs(inst, x);
  const std::vector<double> wy = coupling_at(inst, xi).multiply(y);
  for (int i = 0; i < inst.s(); ++i) {
    if (wy[i] > internal::violation_threshold(inst, i, rhs[i])) return true;
  }
  return false;
}

PCenterResult solve_p_center_cu(const SolutionPool& pool, const ScenarioPool& scen,
                                const KAdaptInstance& inst, std::span<const double> x, int K,
                                double time_limit) {
  std::vector<std::vector<char>> allowed(pool.size(), std::vector<char>(scen.size()));
  for (int j = 0; j < pool.size(); ++j) {
    for (int h = 0; h < scen.size(); ++h) {
      allowed[j][h] = !recourse_violated(inst, x, pool[j], scen[h]);
    }
  }
  return internal::solve_p_center_masked(pool, scen, inst, K, &allowed, time_limit);
}

ScenarioResult generate_scenario_cu(std::span<const std::vector<double>> recourses,
                                    const KAdaptInstance& inst, std::span<const double> x,
                                    double time_limit) {
  if (recourses.empty()) throw ModelError("scenario generation needs at least one recourse");
  const UncertaintySet& set = inst.scenario_set;
  const std::vector<double> rhs = recourse_rhs(inst, x);
  const int k_count = static_cast<int>(recourses.size());

  std::vector<std::vector<double>> costs;
  std::vector<internal::Interval> ranges;
  double top = -milp::kInfinity;
  for (const auto& y : recourses) {
    costs.push_back(recourse_cost_vector(inst, y));
    ranges.push_back(internal::linear_range(costs.back(), set.lo, set.hi));
    top = std::max(top, ranges.back().hi);
  }
  double low = top;
  for (const auto& r : ranges) low = std::min(low, r.lo);

  // max eta  s.t.  eta <= xi'Q y^k + M lambda_k, where lambda_k may only be 1
  // when xi violates some row for y^k. All lambda_k = 1 leaves eta at its cap.
  MilpModel model;
  const int xi = internal::add_scenario_block(model, set);
  const double cap = top + 1.0;
  const int eta = model.add_continuous(low - 1.0, cap);
  for (int k = 0; k < k_count; ++k) {
    const std::vector<int> deltas =
        internal::add_violation_indicators(model, inst, xi, recourses[k], rhs);
    const int lambda = model.add_binary();
    std::vector<Term> upper{{lambda, 1.0}};
    for (int d : deltas) {
      upper.push_back({d, -1.0});
      model.add_row({{lambda, 1.0}, {d, -1.0}}, RowSense::kGreaterEqual, 0.0);
    }
    model.add_row(std::move(upper), RowSense::kLessEqual, 0.0);
    const double big_m = cap - ranges[k].lo;
    std::vector<Term> epi{{eta, 1.0}, {lambda, -big_m}};
    for (int l = 0; l < inst.q; ++l) {
      if (costs[k][l] != 0.0) epi.push_back({xi + l, -costs[k][l]});
    }
    model.add_row(std::move(epi), RowSense::kLessEqual, 0.0);
  }
  model.set_objective({{eta, 1.0}}, 0.0, ObjectiveSense::kMaximize);

  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  const milp::MilpSolution sol = milp::solve_milp(model, limits);
  ScenarioResult result;
  result.nodes = sol.node_count;
  if (sol.status == SolveStatus::kInfeasible) throw ModelError("uncertainty set is empty");
  if (sol.status != SolveStatus::kOptimal) {
    result.status = OracleStatus::kTimeLimit;
    return result;
  }
  result.value = sol.objective;
  result.xi.resize(inst.q);
  for (int l = 0; l < inst.q; ++l) {
    result.xi[l] = std::clamp(sol.values[xi + l], set.lo[l], set.hi[l]);
  }
  for (int k = 0; k < k_count; ++k) {
    if (recourse_violated(inst, x, recourses[k], result.xi)) result.violated.push_back(k);
  }
  result.kills_all = static_cast<int>(result.violated.size()) == k_count;
  return result;
}

SolutionGenResult generate_solutions_cu(const ScenarioPool& scen, const KAdaptInstance& inst,
                                        std::span<const double> x, int K, double time_limit) {
  if (inst.variant != Variant::kConstraint) {
    throw ModelError("generate_solutions_cu expects the constraint variant");
  }
  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  return internal::generate_solutions_impl(scen, inst, x, K, limits, nullptr);
}

}  // namespace kadapt
