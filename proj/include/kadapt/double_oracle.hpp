// Exact solver for the min-max-min subproblem at a fixed first-stage point:
//
//   nu(x) = min_{y^1..y^K in Y(x)} max_{xi in Xi} min_k xi'Q y^k.
//
// The loop alternates three oracles over growing finite pools: a p-center
// problem that picks the best K recourses from the solution pool against the
// scenario pool (upper side), an LP that finds the worst scenario for that
// choice, and a MILP that builds the best K recourses against the scenario
// pool (lower side).

#ifndef KADAPT_DOUBLE_ORACLE_HPP_
#define KADAPT_DOUBLE_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kadapt/instance.hpp"

namespace kadapt {

class ScenarioPool {
 public:
  static constexpr double kDuplicateTol = 1e-9;

  // Appends xi unless an existing member is within kDuplicateTol in the
  // infinity norm. Returns whether it was appended.
  bool add(std::vector<double> xi);
  int size() const { return static_cast<int>(scenarios_.size()); }
  bool empty() const { return scenarios_.empty(); }
  const std::vector<double>& operator[](int h) const { return scenarios_[h]; }
  const std::vector<std::vector<double>>& scenarios() const { return scenarios_; }

 private:
  std::vector<std::vector<double>> scenarios_;
};

class SolutionPool {
 public:
  // Appends y unless already present. Returns its index either way.
  int add(std::vector<double> y);
  int find(const std::vector<double>& y) const;
  int size() const { return static_cast<int>(solutions_.size()); }
  bool empty() const { return solutions_.empty(); }
  const std::vector<double>& operator[](int j) const { return solutions_[j]; }
  const std::vector<std::vector<double>>& solutions() const { return solutions_; }
  // Keeps only the members for which `keep` returns true.
  void filter(const std::function<bool(const std::vector<double>&)>& keep);

 private:
  std::vector<std::vector<double>> solutions_;
};

enum class OracleStatus : std::uint8_t { kOptimal, kInfeasible, kTimeLimit };

struct PCenterResult {
  OracleStatus status = OracleStatus::kOptimal;  // kInfeasible: pool exhausted
  double value = 0.0;             // w*
  std::vector<int> selected;      // pool indices with z_j = 1
  std::vector<int> assignment;    // scenario h -> pool index
  std::int64_t nodes = 0;
};

struct ScenarioResult {
  OracleStatus status = OracleStatus::kOptimal;
  double value = 0.0;  // eta*
  std::vector<double> xi;
  // Constraint uncertainty only: recourses violated at xi, and whether xi
  // violates every one of them.
  std::vector<int> violated;
  bool kills_all = false;
  std::int64_t nodes = 0;
};

struct SolutionGenResult {
  OracleStatus status = OracleStatus::kOptimal;  // kInfeasible: no K-cover exists
  double value = 0.0;  // gamma*
  double bound = 0.0;  // proven lower bound on gamma*, equal to it unless a gap was allowed
  std::vector<std::vector<double>> recourses;
  std::vector<int> assignment;  // scenario h -> recourse index k
  std::int64_t nodes = 0;
};

struct SubproblemTrace {
  int iteration = 0;
  double ub = 0.0;
  double lb = 0.0;
  int scenarios = 0;
  int solutions = 0;
  std::int64_t nodes = 0;
};

struct SubproblemOptions {
  double epsilon = 0.0;  // relative, on max(1, |UB|)
  double scenario_tolerance = 1e-6;
  double time_limit = milp::kInfinity;
  int max_iterations = 100000;
  // Observation hooks, called after every oracle solve.
  std::function<void(const SolutionPool&, const ScenarioPool&, std::span<const double> x,
                     const PCenterResult&)>
      on_p_center;
  std::function<void(const ScenarioPool&, std::span<const double> x, const SolutionGenResult&)>
      on_solution_generation;
  std::function<void(std::span<const std::vector<double>>, const ScenarioResult&)> on_scenario;
  std::function<void(const SubproblemTrace&)> on_trace;
};

struct SubproblemResult {
  OracleStatus status = OracleStatus::kOptimal;
  double ub = milp::kInfinity;   // theta, the worst case of `recourses`
  double lb = -milp::kInfinity;
  std::vector<std::vector<double>> recourses;
  ScenarioPool scenarios;
  SolutionPool solutions;
  int effective_K = 0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int scenarios_added = 0;
  std::int64_t nodes = 0;
  std::vector<SubproblemTrace> trace;
};

// p-center: selects K pool members minimizing the worst assigned cost.
// Requires |pool| >= K and a nonempty scenario pool.
PCenterResult solve_p_center(const SolutionPool& pool, const ScenarioPool& scen,
                             const KAdaptInstance& inst, std::span<const double> x, int K,
                             double time_limit = milp::kInfinity);

// Worst scenario for fixed recourses: max_{xi in Xi} min_k xi'Q y^k.
ScenarioResult generate_scenario(std::span<const std::vector<double>> recourses,
                                 const KAdaptInstance& inst, double time_limit = milp::kInfinity);

// Best K recourses in Y(x) against the scenario pool.
SolutionGenResult generate_solutions(const ScenarioPool& scen, const KAdaptInstance& inst,
                                     std::span<const double> x, int K,
                                     double time_limit = milp::kInfinity);

struct InnerLoopResult {
  OracleStatus status = OracleStatus::kOptimal;
  double ub = milp::kInfinity;  // worst case of the chosen recourses over Xi
  std::vector<int> selected;
  int iterations = 0;
  int scenarios_added = 0;
  std::int64_t nodes = 0;
};

// Alternates p-center and scenario generation until no scenario beats the
// p-center value by more than the tolerance. Scenarios are appended to scen.
InnerLoopResult run_inner_loop(const SolutionPool& pool, ScenarioPool& scen,
                               const KAdaptInstance& inst, std::span<const double> x, int K,
                               const SubproblemOptions& options);

// Initial pools: the nominal scenario and up to K distinct recourses that are
// best under it.
ScenarioPool initial_scenario_pool(const KAdaptInstance& inst);
SolutionPool initial_solution_pool(const KAdaptInstance& inst, std::span<const double> x, int K,
                                   const std::vector<double>& nominal);

// Full double-oracle loop. Pools may be passed in to warm start; the
// solution pool is filtered to recourses usable at x.
SubproblemResult solve_subproblem(const KAdaptInstance& inst, std::span<const double> x, int K,
                                  const SubproblemOptions& options,
                                  const ScenarioPool* warm_scenarios = nullptr,
                                  const SolutionPool* warm_solutions = nullptr);

// Direct evaluation helpers used to check the oracles.
double assignment_cost(const KAdaptInstance& inst, std::span<const double> xi,
                       std::span<const double> y);
// max_h min_{j in selected} xi_h'Q y_j (constraint variant: over pairs that
// stay feasible; +infinity when some scenario has none).
double max_min_value(const KAdaptInstance& inst, std::span<const double> x,
                     std::span<const std::vector<double>> scenarios,
                     std::span<const std::vector<double>> recourses);

}  // namespace kadapt

#endif  // KADAPT_DOUBLE_ORACLE_HPP_
