// Model pieces shared by the objective and constraint-uncertainty oracles.

#ifndef KADAPT_SRC_CORE_DOUBLE_ORACLE_INTERNAL_HPP_
#define KADAPT_SRC_CORE_DOUBLE_ORACLE_INTERNAL_HPP_

#include <span>
#include <vector>

#include "kadapt/double_oracle.hpp"
#include "kadapt/milp.hpp"

namespace kadapt::internal {

// p-center over the pools. When `allowed` is given, pool member j may only
// serve scenario h if allowed[j][h] is nonzero.
PCenterResult solve_p_center_masked(const SolutionPool& pool, const ScenarioPool& scen,
                                    const KAdaptInstance& inst, int K,
                                    const std::vector<std::vector<char>>* allowed,
                                    double time_limit);

// Assignment binaries u[k][h] (k <= h only, -1 elsewhere) with one recourse
// per scenario.
std::vector<std::vector<int>> assignment_block(milp::MilpModel& model, int K, int H);

// gamma >= xi_h'Q y^k for assigned pairs, and the objective min gamma.
// Returns the index of gamma.
int epigraph_block(milp::MilpModel& model, const KAdaptInstance& inst, const ScenarioPool& scen,
                   const std::vector<int>& copies, const std::vector<std::vector<int>>& u);

// Constraint uncertainty: W(xi_h) y^k stays below the feasibility threshold
// whenever u_kh = 1. With x_first >= 0 the first stage is a variable block.
void add_assigned_coupling_rows(milp::MilpModel& model, const KAdaptInstance& inst,
                                std::span<const double> x, int x_first, const ScenarioPool& scen,
                                const std::vector<int>& copies,
                                const std::vector<std::vector<int>>& u);

// Best single recourse for one scenario at x: min xi'Qy over recourses usable
// for xi.
struct ScenarioFloor {
  OracleStatus status = OracleStatus::kInfeasible;
  double value = 0.0;
  std::vector<double> y;
};
ScenarioFloor scenario_floor(const KAdaptInstance& inst, std::span<const double> x,
                             std::span<const double> xi, double time_limit);

// Floors of the pooled scenarios, extended as the pool grows. Only valid for
// one first-stage point and an append-only pool.
struct FloorCache {
  std::vector<ScenarioFloor> floors;
};

// Solution generation for either variant. The cache may be null.
SolutionGenResult generate_solutions_impl(const ScenarioPool& scen, const KAdaptInstance& inst,
                                          std::span<const double> x, int K,
                                          const milp::SolveLimits& limits, FloorCache* cache);

}  // namespace kadapt::internal

#endif  // KADAPT_SRC_CORE_DOUBLE_ORACLE_INTERNAL_HPP_
