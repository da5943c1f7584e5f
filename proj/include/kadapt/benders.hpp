// Logic-based Benders decomposition over the first stage.
//
// The master chooses x (plus an epigraph variable theta for the second-stage
// value) subject to combinatorial cuts; the double-oracle subproblem evaluates
// nu(x) exactly and returns an optimality cut, or a feasibility cut when no
// K recourses can serve every scenario.

#ifndef KADAPT_BENDERS_HPP_
#define KADAPT_BENDERS_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "kadapt/double_oracle.hpp"
#include "kadapt/instance.hpp"
#include "kadapt/milp.hpp"

namespace kadapt {

struct OptimalityCut {
  std::vector<int> support;  // {i : x_i = 1}
  int n = 0;
  double theta = 0.0;  // subproblem value at the cut point
  double lower = 0.0;  // global lower bound on nu
};

struct FeasibilityCut {
  std::vector<int> support;
  int n = 0;
};

// theta >= (theta_r - L_r) (sum_{S} x_i - sum_{not S} x_i - |S| + 1) + L_r.
// Throws when theta < lower beyond a 1e-6 slack; smaller inversions are
// clamped.
OptimalityCut make_optimality_cut(std::span<const double> x, double theta, double lower);
double cut_rhs(const OptimalityCut& cut, std::span<const double> x);
// The cut as a row over variables x_first.. and theta: terms >= rhs.
void add_cut_row(milp::MilpModel& model, const OptimalityCut& cut, int x_first, int theta);

FeasibilityCut make_feasibility_cut(std::span<const double> x);
// Whether x is excluded by the cut (x equals the cut point).
bool cuts_off(const FeasibilityCut& cut, std::span<const double> x);

struct MasterState {
  std::vector<OptimalityCut> optimality_cuts;
  std::vector<FeasibilityCut> feasibility_cuts;
  double theta_lower = -milp::kInfinity;  // valid lower bound on nu over X
};

struct MasterResult {
  milp::SolveStatus status = milp::SolveStatus::kInfeasible;
  std::vector<double> x;
  double objective = milp::kInfinity;  // c'x + first-stage worst case + theta
  double bound = -milp::kInfinity;     // proven lower bound on the master
  std::int64_t nodes = 0;
};

// min c'x + max_{w in Omega} w'Cx + theta over x in X with the cut rows and
// one witness recourse proving that x admits some recourse. Without
// optimality cuts theta is dropped, giving the cheapest first stage.
MasterResult solve_master(const MasterState& state, const KAdaptInstance& inst,
                          double time_limit = milp::kInfinity, double relative_gap = 0.0);

struct LowerBoundResult {
  OracleStatus status = OracleStatus::kOptimal;
  double value = -milp::kInfinity;
  std::int64_t nodes = 0;
};

// min gamma over x in X, K recourses in Y(x) and assignments of the pooled
// scenarios: a lower bound on nu(x) for every x. When a limit stops the
// search, status is kTimeLimit and value is the best proven bound.
LowerBoundResult compute_global_lower_bound(const ScenarioPool& scen, const KAdaptInstance& inst,
                                            int K, double time_limit = milp::kInfinity,
                                            double relative_gap = 0.0,
                                            std::int64_t node_limit = -1);

// Replaces max_{w in Omega} w'Cx in a minimization by its LP dual over new
// variables in `model`; x occupies x_first..x_first+n-1. Returns the terms to
// add to the objective. Dual variables of the rows of Omega are boxed by
// `dual_cap`; box duals get the matching implied bound.
struct RobustTerm {
  std::vector<milp::Term> objective;
  std::vector<int> row_duals;
  double dual_cap = 0.0;
};
RobustTerm robustify_master_objective(milp::MilpModel& model, const KAdaptInstance& inst,
                                      int x_first, double dual_cap);
// The dualized term evaluated at a fixed x, with the same cap handling as
// the master.
double dualized_first_stage_term(const KAdaptInstance& inst, std::span<const double> x);

enum class PolicyStatus : std::uint8_t { kOptimal, kTimeLimit, kInfeasible };
std::string_view to_string(PolicyStatus status);

struct SolveStats {
  int iterations = 0;
  int optimality_cuts = 0;
  int feasibility_cuts = 0;
  int scenarios = 0;  // distinct scenarios generated over the whole run
  int pool_size = 0;  // solution pool of the last subproblem
  int effective_K = 0;
  std::int64_t subproblem_iterations = 0;
  std::int64_t nodes = 0;
  double wall_time = 0.0;
};

struct BendersTrace {
  int iteration = 0;
  double ub = 0.0;
  double lb = 0.0;
  double theta = 0.0;
  double lower = 0.0;
  bool feasibility_cut = false;
  int subproblem_iterations = 0;
  int subproblem_scenarios = 0;  // scenarios added by this iteration's subproblem
  int scenarios = 0;
  int pool_size = 0;
  double elapsed = 0.0;
};

struct SolverOptions {
  int K = 0;  // 0: use the instance's K
  double epsilon = 0.05;
  double time_limit = 7200.0;
  bool warm_start = false;
  double inner_epsilon_factor = 0.1;
  // Node budget of each global lower bound solve. A truncated solve still
  // yields a valid, weaker bound for the cuts.
  std::int64_t lower_bound_node_limit = 100000;
  // Oracle hooks forwarded to every subproblem (the inner epsilon and time
  // limit are set by the solver).
  SubproblemOptions subproblem;
  std::function<void(const OptimalityCut&)> on_optimality_cut;
  std::function<void(const BendersTrace&)> on_iteration;
};

struct KPolicy {
  PolicyStatus status = PolicyStatus::kInfeasible;
  std::vector<double> x;
  std::vector<std::vector<double>> recourses;
  double value = milp::kInfinity;
  double lower_bound = -milp::kInfinity;
  double gap = milp::kInfinity;
  SolveStats stats;
  std::vector<BendersTrace> trace;

  bool has_incumbent() const { return !recourses.empty(); }
};

// Requires a binary first stage and no scenario-dependent first-stage cost.
KPolicy solve(const KAdaptInstance& inst, const SolverOptions& options = {});

// Expands integer first stages into bits and lifts scenario-dependent
// first-stage costs into the recourse before solving. The returned x is in
// the original space; recourses keep the lifted layout.
KPolicy solve_any(const KAdaptInstance& inst, const SolverOptions& options = {});

}  // namespace kadapt

#endif  // KADAPT_BENDERS_HPP_
