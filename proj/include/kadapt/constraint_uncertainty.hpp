// Oracles for uncertain coupling rows, W(xi) = W0 + sum_l xi_l W_l.
//
// A recourse only counts for the scenarios under which it stays feasible.
// It is treated as violated by xi once some row of W(xi) y exceeds
// b - T x by the row's violation margin (see violation_margin).

#ifndef KADAPT_CONSTRAINT_UNCERTAINTY_HPP_
#define KADAPT_CONSTRAINT_UNCERTAINTY_HPP_

#include <span>
#include <vector>

#include "kadapt/double_oracle.hpp"
#include "kadapt/instance.hpp"

namespace kadapt {

// Whether xi violates recourse y at first-stage point x.
bool recourse_violated(const KAdaptInstance& inst, std::span<const double> x,
                       std::span<const double> y, std::span<const double> xi);

// p-center with infeasible (solution, scenario) pairs excluded. Returns
// kInfeasible ("pool exhausted") when some scenario has no usable pool member
// or no K members cover every scenario.
PCenterResult solve_p_center_cu(const SolutionPool& pool, const ScenarioPool& scen,
                                const KAdaptInstance& inst, std::span<const double> x, int K,
                                double time_limit = milp::kInfinity);

// Worst scenario when the adversary may also break recourses. Recourses it
// breaks drop out of the inner minimum; if it can break all of them the
// value is capped and kills_all is set.
ScenarioResult generate_scenario_cu(std::span<const std::vector<double>> recourses,
                                    const KAdaptInstance& inst, std::span<const double> x,
                                    double time_limit = milp::kInfinity);

// Best K recourses of Y_poly such that every scenario is assigned to one that
// stays feasible under it. kInfeasible means no such K recourses exist, so
// the first-stage point admits no finite worst case.
SolutionGenResult generate_solutions_cu(const ScenarioPool& scen, const KAdaptInstance& inst,
                                        std::span<const double> x, int K,
                                        double time_limit = milp::kInfinity);

}  // namespace kadapt

#endif  // KADAPT_CONSTRAINT_UNCERTAINTY_HPP_
