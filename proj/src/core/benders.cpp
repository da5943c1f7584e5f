#include "kadapt/benders.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "core/double_oracle_internal.hpp"
#include "core/model_util.hpp"
#include "kadapt/oracle.hpp"

namespace kadapt {

using milp::MilpModel;
using milp::RowSense;
using milp::SolveStatus;
using milp::Term;

namespace {

constexpr double kCutSlack = 1e-6;

std::vector<int> support_of(std::span<const double> x) {
  std::vector<int> s;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.5) s.push_back(static_cast<int>(i));
  }
  return s;
}

// sum_{S} x_i - sum_{not S} x_i as terms, returning |S|.
int add_support_terms(std::vector<Term>& terms, const std::vector<int>& support, int n,
                      int x_first, double scale) {
  std::vector<char> in(n, 0);
  for (int i : support) in[i] = 1;
  for (int i = 0; i < n; ++i) {
    if (scale != 0.0) terms.push_back({x_first + i, in[i] ? scale : -scale});
  }
  return static_cast<int>(support.size());
}

bool has_independent_first_stage_uncertainty(const KAdaptInstance& inst) {
  return inst.first_stage_uncertainty && !inst.first_stage_uncertainty->dependent;
}

double initial_dual_cap(const KAdaptInstance& inst) {
  double c = 0.0;
  const Matrix& cm = inst.first_stage_uncertainty->cost_map;
  for (int l = 0; l < cm.rows(); ++l) {
    for (int i = 0; i < cm.cols(); ++i) c += std::abs(cm(l, i));
  }
  return 1e3 * (1.0 + c);
}

bool dual_at_cap(const RobustTerm& term, const std::vector<double>& values) {
  for (int v : term.row_duals) {
    if (std::abs(values[v]) >= term.dual_cap * (1.0 - 1e-9)) return true;
  }
  return false;
}

// Solves a model carrying a dualized first-stage term, raising the dual cap
// until no row dual sits on it.
template <typename Build>
milp::MilpSolution solve_with_dual_cap(const KAdaptInstance& inst, Build&& build,
                                       const milp::SolveLimits& limits) {
  double cap = has_independent_first_stage_uncertainty(inst) ? initial_dual_cap(inst) : 0.0;
  for (int attempt = 0;; ++attempt) {
    MilpModel model;
    RobustTerm term;
    build(model, cap, term);
    milp::MilpSolution sol = milp::solve_milp(model, limits);
    if (!sol.optimal() || term.row_duals.empty() || !dual_at_cap(term, sol.values) ||
        attempt == 6) {
      return sol;
    }
    cap *= 100.0;
  }
}

bool converged(double ub, double lb, double epsilon) {
  if (!std::isfinite(ub) || !std::isfinite(lb)) return false;
  return ub - lb <= std::max(epsilon, 1e-9) * std::max(1.0, std::abs(ub));
}

}  // namespace

OptimalityCut make_optimality_cut(std::span<const double> x, double theta, double lower) {
  if (theta < lower - kCutSlack * std::max(1.0, std::abs(theta))) {
    throw std::logic_error("optimality cut with theta " + std::to_string(theta) +
                           " below its lower bound " + std::to_string(lower));
  }
  OptimalityCut cut;
  cut.support = support_of(x);
  cut.n = static_cast<int>(x.size());
  cut.theta = theta;
  cut.lower = std::min(lower, theta);
  return cut;
}

double cut_rhs(const OptimalityCut& cut, std::span<const double> x) {
  const double slope = cut.theta - cut.lower;
  std::vector<char> in(cut.n, 0);
  for (int i : cut.support) in[i] = 1;
  double agree = 0.0;
  for (int i = 0; i < cut.n; ++i) agree += in[i] ? x[i] : -x[i];
  return slope * (agree - static_cast<double>(cut.support.size()) + 1.0) + cut.lower;
}

void add_cut_row(MilpModel& model, const OptimalityCut& cut, int x_first, int theta) {
  const double slope = cut.theta - cut.lower;
  std::vector<Term> terms{{theta, 1.0}};
  const int s = add_support_terms(terms, cut.support, cut.n, x_first, -slope);
  model.add_row(std::move(terms), RowSense::kGreaterEqual, slope * (1.0 - s) + cut.lower);
}

FeasibilityCut make_feasibility_cut(std::span<const double> x) {
  return {support_of(x), static_cast<int>(x.size())};
}

bool cuts_off(const FeasibilityCut& cut, std::span<const double> x) {
  return support_of(x) == cut.support;
}

RobustTerm robustify_master_objective(MilpModel& model, const KAdaptInstance& inst, int x_first,
                                      double dual_cap) {
  RobustTerm term;
  term.dual_cap = dual_cap;
  if (!has_independent_first_stage_uncertainty(inst)) return term;
  const FirstStageUncertainty& fs = *inst.first_stage_uncertainty;
  const UncertaintySet& omega = fs.omega;
  const Matrix& c = fs.cost_map;
  const Polytope& rows = omega.rows;
  const int d = omega.dim();

  // max w'Cx s.t. A w (sense) h, lo <= w <= hi  has the dual
  // min h'pi + hi'alpha - lo'beta  s.t.  A'pi + alpha - beta = Cx.
  for (int r = 0; r < rows.num_rows(); ++r) {
    const double lo = rows.sense[r] == RowSense::kLessEqual ? 0.0 : -dual_cap;
    const double hi = rows.sense[r] == RowSense::kGreaterEqual ? 0.0 : dual_cap;
    const int pi = model.add_continuous(lo, hi);
    term.row_duals.push_back(pi);
    if (rows.rhs[r] != 0.0) term.objective.push_back({pi, rows.rhs[r]});
  }
  for (int l = 0; l < d; ++l) {
    double reach = 0.0;
    for (int i = 0; i < c.cols(); ++i) reach += std::abs(c(l, i));
    for (int r = 0; r < rows.num_rows(); ++r) reach += std::abs(rows.lhs(r, l)) * dual_cap;
    const int alpha = model.add_continuous(0.0, reach);
    const int beta = model.add_continuous(0.0, reach);
    if (omega.hi[l] != 0.0) term.objective.push_back({alpha, omega.hi[l]});
    if (omega.lo[l] != 0.0) term.objective.push_back({beta, -omega.lo[l]});
    std::vector<Term> balance{{alpha, 1.0}, {beta, -1.0}};
    for (int r = 0; r < rows.num_rows(); ++r) {
      if (rows.lhs(r, l) != 0.0) balance.push_back({term.row_duals[r], rows.lhs(r, l)});
    }
    for (int i = 0; i < c.cols(); ++i) {
      if (c(l, i) != 0.0) balance.push_back({x_first + i, -c(l, i)});
    }
    model.add_row(std::move(balance), RowSense::kEqual, 0.0);
  }
  return term;
}

double dualized_first_stage_term(const KAdaptInstance& inst, std::span<const double> x) {
  if (!has_independent_first_stage_uncertainty(inst)) return 0.0;
  const auto sol = solve_with_dual_cap(
      inst,
      [&](MilpModel& model, double cap, RobustTerm& term) {
        for (int i = 0; i < inst.n; ++i) model.add_continuous(x[i], x[i]);
        term = robustify_master_objective(model, inst, 0, cap);
        model.set_objective(term.objective);
      },
      {});
  if (!sol.optimal()) throw ModelError("first-stage uncertainty set is empty");
  return sol.objective;
}

MasterResult solve_master(const MasterState& state, const KAdaptInstance& inst, double time_limit,
                          double relative_gap) {
  double theta_lo = state.theta_lower, theta_hi = state.theta_lower;
  for (const auto& cut : state.optimality_cuts) {
    theta_lo = std::max(theta_lo, cut.lower);
    theta_hi = std::max(theta_hi, cut.theta);
  }
  const bool with_theta = std::isfinite(theta_lo);
  const bool cu = inst.variant == Variant::kConstraint;
  const std::vector<double> nominal = cu ? nominal_scenario(inst) : std::vector<double>{};

  int theta = -1;
  auto build = [&](MilpModel& model, double cap, RobustTerm& term) {
    const int x = internal::add_binaries(model, inst.n);
    internal::add_polytope_rows(model, inst.first_stage_set, x);
    std::vector<Term> objective;
    for (int i = 0; i < inst.n; ++i) {
      if (inst.first_stage_cost[i] != 0.0) objective.push_back({x + i, inst.first_stage_cost[i]});
    }
    term = robustify_master_objective(model, inst, x, cap);
    objective.insert(objective.end(), term.objective.begin(), term.objective.end());
    if (with_theta) {
      theta = model.add_continuous(theta_lo, theta_hi);
      objective.push_back({theta, 1.0});
      for (const auto& cut : state.optimality_cuts) add_cut_row(model, cut, x, theta);
    }
    for (const auto& cut : state.feasibility_cuts) {
      std::vector<Term> terms;
      const int s = add_support_terms(terms, cut.support, cut.n, x, 1.0);
      model.add_row(std::move(terms), RowSense::kLessEqual, s - 1.0);
    }
    // Witness recourse: some y in Y_poly with T x + W y <= b (constraint
    // variant: W at the nominal scenario, up to the violation threshold).
    const int y = internal::add_binaries(model, inst.m);
    internal::add_polytope_rows(model, inst.recourse_set, y);
    const Matrix w = cu ? coupling_at(inst, nominal) : inst.coupling_recourse;
    for (int i = 0; i < inst.s(); ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < inst.n; ++j) {
        if (inst.coupling_first(i, j) != 0.0) terms.push_back({x + j, inst.coupling_first(i, j)});
      }
      for (int j = 0; j < inst.m; ++j) {
        if (w(i, j) != 0.0) terms.push_back({y + j, w(i, j)});
      }
      const double rhs = cu ? internal::violation_threshold(inst, i, inst.coupling_rhs[i])
                            : inst.coupling_rhs[i];
      model.add_row(std::move(terms), RowSense::kLessEqual, rhs);
    }
    model.set_objective(std::move(objective));
  };

  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  limits.relative_gap = relative_gap;
  const milp::MilpSolution sol = solve_with_dual_cap(inst, build, limits);
  MasterResult result;
  result.status = sol.status;
  result.nodes = sol.node_count;
  if (std::isfinite(sol.bound)) result.bound = sol.bound;
  if (sol.has_incumbent()) {
    result.x = internal::binary_block(sol.values, 0, inst.n);
    result.objective = sol.objective;
  }
  return result;
}

LowerBoundResult compute_global_lower_bound(const ScenarioPool& scen, const KAdaptInstance& inst,
                                            int K, double time_limit, double relative_gap,
                                            std::int64_t node_limit) {
  if (scen.empty()) throw ModelError("lower bound needs at least one scenario");
  if (K < 1) throw ModelError("K must be positive");
  const bool cu = inst.variant == Variant::kConstraint;
  const int H = scen.size();
  MilpModel model;
  const int x = internal::add_binaries(model, inst.n);
  internal::add_polytope_rows(model, inst.first_stage_set, x);
  std::vector<int> copies;
  for (int k = 0; k < K; ++k) {
    const int y = internal::add_binaries(model, inst.m);
    internal::add_polytope_rows(model, inst.recourse_set, y);
    copies.push_back(y);
    if (cu) continue;
    for (int i = 0; i < inst.s(); ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < inst.n; ++j) {
        if (inst.coupling_first(i, j) != 0.0) terms.push_back({x + j, inst.coupling_first(i, j)});
      }
      for (int j = 0; j < inst.m; ++j) {
        if (inst.coupling_recourse(i, j) != 0.0) {
          terms.push_back({y + j, inst.coupling_recourse(i, j)});
        }
      }
      model.add_row(std::move(terms), RowSense::kLessEqual, inst.coupling_rhs[i]);
    }
  }
  const auto u = internal::assignment_block(model, K, H);
  internal::epigraph_block(model, inst, scen, copies, u);
  if (cu) internal::add_assigned_coupling_rows(model, inst, {}, x, scen, copies, u);
  milp::SolveLimits limits;
  limits.time_limit = time_limit;
  limits.relative_gap = relative_gap;
  limits.node_limit = node_limit;
  const milp::MilpSolution sol = milp::solve_milp(model, limits);
  LowerBoundResult result;
  result.nodes = sol.node_count;
  switch (sol.status) {
    case SolveStatus::kOptimal:
      result.value = sol.bound;
      break;
    case SolveStatus::kTimeLimit:
      result.status = OracleStatus::kTimeLimit;
      if (std::isfinite(sol.bound)) result.value = sol.bound;
      break;
    default:
      result.status = OracleStatus::kInfeasible;
      break;
  }
  return result;
}

std::string_view to_string(PolicyStatus status) {
  switch (status) {
    case PolicyStatus::kOptimal:
      return "Optimal";
    case PolicyStatus::kTimeLimit:
      return "TimeLimit";
    case PolicyStatus::kInfeasible:
      return "Infeasible";
  }
  return "Unknown";
}

KPolicy solve(const KAdaptInstance& inst, const SolverOptions& options) {
  if (inst.integer_first_stage()) {
    throw ModelError("integer first stage: expand it into binaries first (see solve_any)");
  }
  if (inst.dependent_first_stage()) {
    throw ModelError("scenario-dependent first-stage cost: lift it first (see solve_any)");
  }
  const int K = options.K > 0 ? options.K : inst.K;
  if (K < 1) throw ModelError("K must be positive");
  if (options.epsilon < 0.0) throw ModelError("epsilon must be nonnegative");
  const internal::Deadline deadline(options.time_limit);
  const double inner_epsilon = options.inner_epsilon_factor * options.epsilon;

  KPolicy policy;
  policy.stats.effective_K = K;
  double ub = milp::kInfinity, lb = -milp::kInfinity;
  auto finish = [&](PolicyStatus status) {
    policy.status = status;
    policy.value = ub;
    policy.lower_bound = std::min(lb, ub);
    policy.gap = std::isfinite(ub) && std::isfinite(lb)
                     ? std::max(0.0, ub - lb) / std::max(1.0, std::abs(ub))
                     : milp::kInfinity;
    if (status == PolicyStatus::kInfeasible) {
      policy.x.clear();
      policy.recourses.clear();
    }
    policy.stats.wall_time = deadline.elapsed();
    return policy;
  };

  MasterState state;
  MasterResult master = solve_master(state, inst, deadline.remaining(), 0.0);
  policy.stats.nodes += master.nodes;
  if (master.status == SolveStatus::kInfeasible) return finish(PolicyStatus::kInfeasible);
  if (master.status != SolveStatus::kOptimal) return finish(PolicyStatus::kTimeLimit);

  ScenarioPool all_scenarios;
  LowerBoundResult lower;
  int lower_pool_size = -1;
  ScenarioPool warm_scenarios;
  SolutionPool warm_solutions;
  std::set<std::vector<double>> visited;
  std::vector<double> x = master.x;

  while (true) {
    if (deadline.expired()) return finish(PolicyStatus::kTimeLimit);
    ++policy.stats.iterations;
    visited.insert(x);

    SubproblemOptions sp_options = options.subproblem;
    sp_options.epsilon = inner_epsilon;
    sp_options.time_limit = deadline.remaining();
    const bool warm = options.warm_start && policy.stats.iterations > 1;
    const SubproblemResult sp = solve_subproblem(inst, x, K, sp_options,
                                                 warm ? &warm_scenarios : nullptr,
                                                 warm ? &warm_solutions : nullptr);
    policy.stats.subproblem_iterations += sp.inner_iterations;
    policy.stats.nodes += sp.nodes;
    policy.stats.pool_size = sp.solutions.size();
    if (sp.effective_K > 0) policy.stats.effective_K = sp.effective_K;
    for (const auto& xi : sp.scenarios.scenarios()) all_scenarios.add(xi);
    policy.stats.scenarios = all_scenarios.size();
    if (options.warm_start) {
      warm_scenarios = sp.scenarios;
      warm_solutions = sp.solutions;
    }
    if (sp.status == OracleStatus::kTimeLimit) return finish(PolicyStatus::kTimeLimit);

    // The bound only changes when the global pool grows.
    if (all_scenarios.size() != lower_pool_size) {
      lower = compute_global_lower_bound(all_scenarios, inst, K, deadline.remaining(),
                                         inner_epsilon, options.lower_bound_node_limit);
      lower_pool_size = all_scenarios.size();
      policy.stats.nodes += lower.nodes;
    }
    if (lower.status == OracleStatus::kInfeasible) {
      // No first stage admits K recourses covering the pooled scenarios.
      return finish(std::isfinite(ub) ? PolicyStatus::kOptimal : PolicyStatus::kInfeasible);
    }
    if (lower.status == OracleStatus::kTimeLimit &&
        (deadline.expired() || !std::isfinite(lower.value))) {
      return finish(PolicyStatus::kTimeLimit);
    }
    state.theta_lower = std::max(state.theta_lower, lower.value);

    BendersTrace trace;
    trace.iteration = policy.stats.iterations;
    trace.subproblem_iterations = sp.inner_iterations;
    trace.subproblem_scenarios = sp.scenarios_added;
    trace.scenarios = all_scenarios.size();
    trace.pool_size = sp.solutions.size();
    trace.lower = lower.value;
    if (sp.status == OracleStatus::kOptimal) {
      double total = sp.ub + first_stage_worst_case(inst, x);
      for (int i = 0; i < inst.n; ++i) total += inst.first_stage_cost[i] * x[i];
      if (total < ub) {
        ub = total;
        policy.x = x;
        policy.recourses = sp.recourses;
      }
      const OptimalityCut cut = make_optimality_cut(x, sp.ub, std::min(lower.value, sp.ub));
      state.optimality_cuts.push_back(cut);
      ++policy.stats.optimality_cuts;
      if (options.on_optimality_cut) options.on_optimality_cut(cut);
      trace.theta = sp.ub;
      trace.lower = cut.lower;
    } else {
      state.feasibility_cuts.push_back(make_feasibility_cut(x));
      ++policy.stats.feasibility_cuts;
      trace.feasibility_cut = true;
      trace.theta = milp::kInfinity;
    }

    master = solve_master(state, inst, deadline.remaining(), inner_epsilon);
    policy.stats.nodes += master.nodes;
    if (master.status == SolveStatus::kInfeasible) {
      // Every first stage is cut off: the incumbent, if any, is optimal.
      lb = ub;
    } else {
      lb = std::max(lb, master.bound);
    }
    trace.ub = ub;
    trace.lb = std::min(lb, ub);
    trace.elapsed = deadline.elapsed();
    policy.trace.push_back(trace);
    if (options.on_iteration) options.on_iteration(trace);

    if (master.status == SolveStatus::kInfeasible) {
      return finish(std::isfinite(ub) ? PolicyStatus::kOptimal : PolicyStatus::kInfeasible);
    }
    if (master.status != SolveStatus::kOptimal) return finish(PolicyStatus::kTimeLimit);
    if (converged(ub, lb, options.epsilon)) return finish(PolicyStatus::kOptimal);
    // A revisited point carries a cut that already prices it exactly, so the
    // master value can only match the incumbent up to round-off.
    if (visited.count(master.x)) return finish(PolicyStatus::kOptimal);
    x = master.x;
  }
}

KPolicy solve_any(const KAdaptInstance& inst, const SolverOptions& options) {
  std::optional<BinaryExpansion> expansion;
  KAdaptInstance work = inst;
  if (inst.integer_first_stage()) {
    expansion = binary_expand(inst);
    work = expansion->instance;
  }
  if (work.dependent_first_stage()) work = lift_dependent_first_stage(work);
  KPolicy policy = solve(work, options);
  if (expansion && !policy.x.empty()) policy.x = expansion->to_integer(policy.x);
  return policy;
}

}  // namespace kadapt
