#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <utility>
#include <vector>

#include "dual_simplex.hpp"
#include "kadapt/milp.hpp"

namespace kadapt::milp {
namespace {

using internal::Basis;
using internal::Deadline;
using internal::DualSimplex;
using internal::LpOutcome;
using internal::StandardForm;

struct Node {
  double bound = -kInfinity;
  int depth = 0;
  std::int64_t id = 0;
  std::vector<std::pair<int, std::uint8_t>> fixes;
  std::shared_ptr<const Basis> basis;
};

// Best bound first; among equal bounds the deeper node, then creation order.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

double to_model_sense(const StandardForm& sf, double internal_value,
                      double constant) {
  return sf.cost_sign * internal_value + constant;
}

}  // namespace

MilpSolution solve_lp(const MilpModel& model) { return solve_lp(model, {}); }

MilpSolution solve_lp(const MilpModel& model, const SolveLimits& limits) {
  model.validate();
  if (!model.all_continuous()) {
    throw ModelError("solve_lp requires an all-continuous model");
  }
  const Deadline deadline(limits.time_limit);
  const StandardForm sf = internal::to_standard_form(model);
  DualSimplex lp(sf);
  MilpSolution sol;
  const LpOutcome outcome = lp.solve(kInfinity, deadline);
  sol.simplex_iterations = lp.iterations();
  sol.wall_time = deadline.elapsed();
  switch (outcome) {
    case LpOutcome::kInfeasible:
      sol.status = SolveStatus::kInfeasible;
      return sol;
    case LpOutcome::kTimeLimit:
      sol.status = SolveStatus::kTimeLimit;
      sol.bound = to_model_sense(sf, lp.objective(), model.objective_constant());
      return sol;
    case LpOutcome::kCutoff:
    case LpOutcome::kOptimal:
      break;
  }
  sol.status = SolveStatus::kOptimal;
  sol.values.assign(lp.values().begin(), lp.values().begin() + sf.cols);
  sol.objective = to_model_sense(sf, lp.objective(), model.objective_constant());
  sol.bound = sol.objective;
  sol.duals.resize(sf.rows);
  for (int i = 0; i < sf.rows; ++i) sol.duals[i] = sf.cost_sign * lp.row_duals()[i];
  return sol;
}

MilpSolution solve_milp(const MilpModel& model, const SolveLimits& limits) {
  model.validate();
  const Deadline deadline(limits.time_limit);
  const StandardForm sf = internal::to_standard_form(model);
  DualSimplex lp(sf);

  std::vector<int> binaries;
  for (int j = 0; j < sf.cols; ++j) {
    if (model.variable(j).kind == VarKind::kBinary) binaries.push_back(j);
  }

  MilpSolution sol;
  double incumbent = kInfinity;  // internal (minimization) objective
  bool found = false;
  std::vector<double> best_values;
  const auto prune_level = [&]() {
    if (!std::isfinite(incumbent)) return kInfinity;
    const double scale = std::max(1.0, std::abs(incumbent));
    return incumbent - std::max(1e-9 * scale, limits.relative_gap * scale);
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  const Basis* engine_basis = nullptr;
  std::shared_ptr<const Basis> engine_holder;

  Node current;
  current.id = next_id++;
  bool have_current = true;
  bool timed_out = false;
  double timeout_bound = kInfinity;
  // Smallest bound among nodes discarded only because of the gap tolerance.
  double pruned_bound = kInfinity;

  while (have_current || !open.empty()) {
    if (!have_current) {
      current = open.top();
      open.pop();
    }
    have_current = false;
    if (current.bound >= prune_level()) {
      pruned_bound = std::min(pruned_bound, current.bound);
      continue;
    }
    if (deadline.expired() || (limits.node_limit >= 0 && sol.node_count >= limits.node_limit)) {
      timed_out = true;
      timeout_bound = current.bound;
      break;
    }

    for (int j : binaries) {
      lp.set_bounds(j, model.variable(j).lo, model.variable(j).hi);
    }
    for (auto [j, v] : current.fixes) lp.set_bounds(j, v, v);
    if (current.basis && current.basis.get() != engine_basis) {
      lp.load_basis(*current.basis);
    }
    engine_basis = nullptr;
    engine_holder.reset();

    const LpOutcome outcome = lp.solve(prune_level(), deadline);
    ++sol.node_count;
    if (outcome == LpOutcome::kTimeLimit) {
      timed_out = true;
      timeout_bound = current.bound;
      break;
    }
    if (outcome == LpOutcome::kCutoff) pruned_bound = std::min(pruned_bound, prune_level());
    if (outcome != LpOutcome::kOptimal) continue;

    const double obj = lp.objective();
    const std::vector<double>& x = lp.values();
    int branch_var = -1;
    double most = 0.0;
    for (int j : binaries) {
      const double frac = std::abs(x[j] - std::round(x[j]));
      if (frac > kIntegralityTol && frac > most + 1e-12) {
        most = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      if (obj < incumbent) {
        incumbent = obj;
        found = true;
        best_values.assign(x.begin(), x.begin() + sf.cols);
        for (int j : binaries) best_values[j] = std::round(best_values[j]);
      }
      continue;
    }

    auto snapshot = std::make_shared<const Basis>(lp.basis());
    engine_basis = snapshot.get();
    engine_holder = snapshot;
    const std::uint8_t preferred = x[branch_var] >= 0.5 ? 1 : 0;
    Node children[2];
    for (int k = 0; k < 2; ++k) {
      Node& child = children[k];
      child.bound = obj;
      child.depth = current.depth + 1;
      child.id = next_id++;
      child.fixes = current.fixes;
      child.fixes.emplace_back(branch_var,
                               k == 0 ? preferred : static_cast<std::uint8_t>(1 - preferred));
      child.basis = snapshot;
    }
    open.push(std::move(children[1]));
    // Plunge into the preferred child while it is still a best-bound node.
    const double tie = 1e-9 * (1.0 + std::abs(obj));
    if (open.empty() || obj <= open.top().bound + tie) {
      current = std::move(children[0]);
      have_current = true;
    } else {
      open.push(std::move(children[0]));
    }
  }

  sol.wall_time = deadline.elapsed();
  sol.simplex_iterations = lp.iterations();
  const double constant = model.objective_constant();
  if (found) {
    sol.values = std::move(best_values);
    sol.objective = model.evaluate_objective(sol.values);
  }
  if (timed_out) {
    double bound = std::min({timeout_bound, incumbent, pruned_bound});
    while (!open.empty()) {
      bound = std::min(bound, open.top().bound);
      open.pop();
    }
    sol.status = SolveStatus::kTimeLimit;
    sol.bound = to_model_sense(sf, bound, constant);
    return sol;
  }
  if (!found) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  sol.status = SolveStatus::kOptimal;
  sol.bound = to_model_sense(sf, std::min(incumbent, pruned_bound), constant);
  return sol;
}

}  // namespace kadapt::milp
