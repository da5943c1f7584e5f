#include "kadapt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/model_util.hpp"

namespace kadapt {

using milp::MilpModel;
using milp::ObjectiveSense;
using milp::RowSense;
using milp::Term;

namespace {

constexpr double kDominanceTol = 1e-9;

std::vector<double> cost_with_shift(const KAdaptInstance& inst, const std::vector<double>& y,
                                    std::span<const double> shift) {
  std::vector<double> v = recourse_cost_vector(inst, y);
  for (size_t l = 0; l < shift.size(); ++l) v[l] += shift[l];
  return v;
}

// Bounds of xi'v over the box of the scenario set.
internal::Interval box_range(const UncertaintySet& set, std::span<const double> v) {
  return internal::linear_range(v, set.lo, set.hi);
}

double min_over_set(const UncertaintySet& set, std::span<const double> v) {
  MilpModel model;
  const int xi = internal::add_scenario_block(model, set);
  std::vector<Term> obj;
  for (int l = 0; l < set.dim(); ++l) {
    if (v[l] != 0.0) obj.push_back({xi + l, v[l]});
  }
  model.set_objective(std::move(obj));
  const auto sol = milp::solve_lp(model);
  if (!sol.optimal()) throw ModelError("uncertainty set is empty");
  return sol.objective;
}

// True when xi'a >= xi'b for every scenario, i.e. b is never worse than a.
bool dominated_by(const UncertaintySet& set, const std::vector<double>& a,
                  const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (size_t l = 0; l < a.size(); ++l) d[l] = a[l] - b[l];
  const internal::Interval r = box_range(set, d);
  if (r.lo >= -kDominanceTol) return true;
  if (r.hi < -kDominanceTol) return false;
  if (set.rows.num_rows() == 0) return false;
  return min_over_set(set, d) >= -kDominanceTol;
}

template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

BinaryPoints enumerate_feasible_binary(const Polytope& poly, int dim) {
  if (dim > 20) {
    throw BudgetError("binary enumeration over " + std::to_string(dim) +
                      " dimensions exceeds the limit of 20");
  }
  if (poly.dim() != dim) throw ModelError("polytope dimension does not match");
  BinaryPoints out;
  std::vector<double> z(dim);
  for (long mask = 0; mask < (1L << dim); ++mask) {
    for (int j = 0; j < dim; ++j) z[j] = (mask >> (dim - 1 - j)) & 1;
    if (poly.violation(z) <= milp::kFeasibilityTol) out.push_back(z);
  }
  return out;
}

BinaryPoints enumerate_first_stage(const KAdaptInstance& inst, const OracleBudget& budget) {
  if (!inst.integer_first_stage()) {
    BinaryPoints pts = enumerate_feasible_binary(inst.first_stage_set, inst.n);
    if (static_cast<std::int64_t>(pts.size()) > budget.max_first_stage_points) {
      throw BudgetError("first-stage enumeration exceeds its budget");
    }
    return pts;
  }
  double box = 1.0;
  for (int ub : inst.integer_upper) box *= ub + 1.0;
  if (box > double(1 << 22)) throw BudgetError("integer first-stage box is too large");
  BinaryPoints out;
  std::vector<double> x(inst.n, 0.0);
  while (true) {
    if (inst.first_stage_set.violation(x) <= milp::kFeasibilityTol) {
      out.push_back(x);
      if (static_cast<std::int64_t>(out.size()) > budget.max_first_stage_points) {
        throw BudgetError("first-stage enumeration exceeds its budget");
      }
    }
    int i = inst.n - 1;
    while (i >= 0 && x[i] == inst.integer_upper[i]) x[i--] = 0.0;
    if (i < 0) break;
    x[i] += 1.0;
  }
  return out;
}

BinaryPoints feasible_recourses(const KAdaptInstance& inst, std::span<const double> x,
                                const OracleBudget& /*budget*/) {
  const BinaryPoints all = enumerate_feasible_binary(inst.recourse_set, inst.m);
  const std::vector<double> rhs = recourse_rhs(inst, x);
  BinaryPoints out;
  for (const auto& y : all) {
    bool ok = true;
    if (inst.variant == Variant::kObjective) {
      ok = recourse_feasible(inst, x, y);
    } else if (inst.s() > 0) {
      // Keep y when some scenario leaves every row below the threshold.
      MilpModel model;
      const int xi = internal::add_scenario_block(model, inst.scenario_set);
      for (int i = 0; i < inst.s(); ++i) {
        double constant = 0.0;
        std::vector<Term> terms;
        for (int j = 0; j < inst.m; ++j) constant += inst.coupling_recourse(i, j) * y[j];
        for (int l = 0; l < inst.q; ++l) {
          double a = 0.0;
          for (int j = 0; j < inst.m; ++j) a += inst.coupling_uncertain[l](i, j) * y[j];
          if (a != 0.0) terms.push_back({xi + l, a});
        }
        const double limit = internal::feasibility_threshold(inst, i, rhs[i]) - constant;
        if (terms.empty()) {
          if (limit < 0) ok = false;
        } else {
          model.add_row(std::move(terms), RowSense::kLessEqual, limit);
        }
      }
      if (ok) ok = milp::solve_lp(model).optimal();
    }
    if (ok) out.push_back(y);
  }
  return out;
}

double exact_inner_value(const KAdaptInstance& inst,
                         std::span<const std::vector<double>> recourses,
                         std::span<const double> shift) {
  if (recourses.empty()) throw ModelError("inner value needs at least one recourse");
  const UncertaintySet& set = inst.scenario_set;
  std::vector<std::vector<double>> costs;
  double bound = 0.0;
  for (const auto& y : recourses) {
    costs.push_back(cost_with_shift(inst, y, shift));
    const internal::Interval r = box_range(set, costs.back());
    bound = std::max({bound, std::abs(r.lo), std::abs(r.hi)});
  }
  MilpModel model;
  const int xi = internal::add_scenario_block(model, set);
  const int eta = model.add_continuous(-bound - 1.0, bound + 1.0);
  for (const auto& v : costs) {
    std::vector<Term> terms{{eta, 1.0}};
    for (int l = 0; l < inst.q; ++l) {
      if (v[l] != 0.0) terms.push_back({xi + l, -v[l]});
    }
    model.add_row(std::move(terms), RowSense::kLessEqual, 0.0);
  }
  model.set_objective({{eta, 1.0}}, 0.0, ObjectiveSense::kMaximize);
  const auto sol = milp::solve_lp(model);
  if (!sol.optimal()) throw ModelError("uncertainty set is empty");
  return sol.objective;
}

using internal::add_violation_indicators;

double exact_inner_value_constrained(const KAdaptInstance& inst, std::span<const double> x,
                                     std::span<const std::vector<double>> recourses) {
  if (recourses.empty()) throw ModelError("inner value needs at least one recourse");
  if (inst.variant != Variant::kConstraint) return exact_inner_value(inst, recourses);
  const std::vector<double> rhs = recourse_rhs(inst, x);
  std::vector<double> shift;
  if (inst.dependent_first_stage()) shift = inst.first_stage_uncertainty->cost_map.multiply(x);
  const int k_count = static_cast<int>(recourses.size());

  // Can a single scenario violate every recourse?
  {
    MilpModel model;
    const int xi = internal::add_scenario_block(model, inst.scenario_set);
    bool possible = true;
    for (const auto& y : recourses) {
      const std::vector<int> deltas = add_violation_indicators(model, inst, xi, y, rhs);
      if (deltas.empty()) {
        possible = false;
        break;
      }
      std::vector<Term> any;
      for (int d : deltas) any.push_back({d, 1.0});
      model.add_row(std::move(any), RowSense::kGreaterEqual, 1.0);
    }
    if (possible && milp::solve_milp(model).optimal()) return milp::kInfinity;
  }

  std::vector<std::vector<double>> costs;
  std::vector<internal::Interval> ranges;
  double top = -milp::kInfinity;
  for (const auto& y : recourses) {
    costs.push_back(cost_with_shift(inst, y, shift));
    ranges.push_back(box_range(inst.scenario_set, costs.back()));
    top = std::max(top, ranges.back().hi);
  }
  double low = top;
  for (const auto& r : ranges) low = std::min(low, r.lo);

  MilpModel model;
  const int xi = internal::add_scenario_block(model, inst.scenario_set);
  const int eta = model.add_continuous(low - 1.0, top + 1.0);
  std::vector<Term> lambda_sum;
  for (int k = 0; k < k_count; ++k) {
    const std::vector<int> deltas = add_violation_indicators(model, inst, xi, recourses[k], rhs);
    const int lambda = model.add_binary();
    lambda_sum.push_back({lambda, 1.0});
    std::vector<Term> upper{{lambda, 1.0}};
    for (int d : deltas) {
      upper.push_back({d, -1.0});
      model.add_row({{lambda, 1.0}, {d, -1.0}}, RowSense::kGreaterEqual, 0.0);
    }
    model.add_row(std::move(upper), RowSense::kLessEqual, 0.0);
    // eta <= xi'v_k + M lambda_k
    const double big_m = top - ranges[k].lo + 1.0;
    std::vector<Term> epi{{eta, 1.0}, {lambda, -big_m}};
    for (int l = 0; l < inst.q; ++l) {
      if (costs[k][l] != 0.0) epi.push_back({xi + l, -costs[k][l]});
    }
    model.add_row(std::move(epi), RowSense::kLessEqual, 0.0);
  }
  model.add_row(std::move(lambda_sum), RowSense::kLessEqual, k_count - 1);
  model.set_objective({{eta, 1.0}}, 0.0, ObjectiveSense::kMaximize);
  const auto sol = milp::solve_milp(model);
  if (!sol.optimal()) throw ModelError("constrained inner evaluation failed");
  return sol.objective;
}

double first_stage_worst_case(const KAdaptInstance& inst, std::span<const double> x) {
  if (!inst.first_stage_uncertainty || inst.first_stage_uncertainty->dependent) return 0.0;
  const FirstStageUncertainty& fs = *inst.first_stage_uncertainty;
  const std::vector<double> cx = fs.cost_map.multiply(x);
  MilpModel model;
  const int w = internal::add_scenario_block(model, fs.omega);
  std::vector<Term> obj;
  for (int l = 0; l < fs.omega.dim(); ++l) {
    if (cx[l] != 0.0) obj.push_back({w + l, cx[l]});
  }
  model.set_objective(std::move(obj), 0.0, ObjectiveSense::kMaximize);
  const auto sol = milp::solve_lp(model);
  if (!sol.optimal()) throw ModelError("first-stage uncertainty set is empty");
  return sol.objective;
}

OracleResult second_stage_value(const KAdaptInstance& inst, std::span<const double> x, int K,
                                const OracleBudget& budget) {
  if (K < 1) throw ModelError("K must be at least 1");
  OracleResult result;
  result.x.assign(x.begin(), x.end());
  BinaryPoints cands = feasible_recourses(inst, x, budget);
  if (cands.empty()) return result;

  std::vector<double> shift;
  if (inst.dependent_first_stage()) shift = inst.first_stage_uncertainty->cost_map.multiply(x);

  if (inst.variant == Variant::kObjective) {
    // Replacing a recourse by one that is never more expensive cannot raise
    // the value of any subset, so dominated recourses are dropped.
    std::vector<std::vector<double>> costs;
    for (const auto& y : cands) costs.push_back(cost_with_shift(inst, y, shift));
    std::vector<bool> removed(cands.size(), false);
    for (size_t a = 0; a < cands.size(); ++a) {
      for (size_t b = 0; b < cands.size(); ++b) {
        if (a == b || removed[b]) continue;
        if (dominated_by(inst.scenario_set, costs[a], costs[b])) {
          removed[a] = true;
          break;
        }
      }
    }
    BinaryPoints kept;
    for (size_t a = 0; a < cands.size(); ++a) {
      if (!removed[a]) kept.push_back(std::move(cands[a]));
    }
    cands = std::move(kept);
  }
  if (static_cast<std::int64_t>(cands.size()) > budget.max_recourse_points) {
    throw BudgetError("recourse enumeration (" + std::to_string(cands.size()) +
                      " points) exceeds its budget");
  }

  const int n_cand = static_cast<int>(cands.size());
  const int k = std::min(K, n_cand);
  if (binomial(n_cand, k) > static_cast<double>(budget.max_k_subsets)) {
    throw BudgetError("K-subset enumeration exceeds its budget");
  }
  std::vector<std::vector<double>> subset(k);
  for_each_combination(n_cand, k, [&](const std::vector<int>& idx) {
    for (int i = 0; i < k; ++i) subset[i] = cands[idx[i]];
    ++result.subsets_evaluated;
    const double v = inst.variant == Variant::kObjective
                         ? exact_inner_value(inst, subset, shift)
                         : exact_inner_value_constrained(inst, x, subset);
    if (v < result.value) {
      result.value = v;
      result.recourses = subset;
      result.feasible = std::isfinite(v);
    }
  });
  return result;
}

OracleResult brute_force_solve(const KAdaptInstance& inst, int K, const OracleBudget& budget) {
  validate(inst);
  OracleResult best;
  for (const auto& x : enumerate_first_stage(inst, budget)) {
    OracleResult at = second_stage_value(inst, x, K, budget);
    best.subsets_evaluated += at.subsets_evaluated;
    if (!at.feasible) continue;
    ++best.first_stage_points;
    double total = at.value + first_stage_worst_case(inst, x);
    for (int i = 0; i < inst.n; ++i) total += inst.first_stage_cost[i] * x[i];
    if (total < best.value) {
      best.value = total;
      best.x = x;
      best.recourses = std::move(at.recourses);
      best.feasible = true;
    }
  }
  return best;
}

}  // namespace kadapt
