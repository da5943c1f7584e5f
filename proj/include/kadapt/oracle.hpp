// Brute-force ground truth for tiny instances.
//
// Everything here is computed by enumeration plus exact LP/MILP evaluation
// through the backend alone, never through the decomposition code, so it can
// serve as an independent reference.

#ifndef KADAPT_ORACLE_HPP_
#define KADAPT_ORACLE_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "kadapt/instance.hpp"

namespace kadapt {

// Raised when an enumeration would exceed its budget. The oracle refuses
// rather than silently truncating.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleBudget {
  std::int64_t max_first_stage_points = 4096;
  std::int64_t max_recourse_points = 64;
  std::int64_t max_k_subsets = 100000;
};

using BinaryPoints = std::vector<std::vector<double>>;

// Binary points of `poly` in lexicographic order (coordinate 0 most
// significant). Throws BudgetError for dim > 20.
BinaryPoints enumerate_feasible_binary(const Polytope& poly, int dim);

// max_{xi in Xi} min_k xi'(Q y^k + shift) by one epigraph LP. `shift` (size q,
// may be empty) carries a scenario-dependent first-stage cost.
double exact_inner_value(const KAdaptInstance& inst, std::span<const std::vector<double>> recourses,
                         std::span<const double> shift = {});

// Constraint-uncertainty counterpart at first-stage point x: the adversary
// may also pick scenarios that violate recourses, which then drop out of the
// minimum. Returns +infinity when some scenario violates every recourse.
double exact_inner_value_constrained(const KAdaptInstance& inst, std::span<const double> x,
                                     std::span<const std::vector<double>> recourses);

// max_{w in Omega} w'Cx for the independent first-stage uncertainty (0 when
// the instance has none).
double first_stage_worst_case(const KAdaptInstance& inst, std::span<const double> x);

struct OracleResult {
  bool feasible = false;
  double value = milp::kInfinity;  // total objective, first stage included
  std::vector<double> x;
  std::vector<std::vector<double>> recourses;
  std::int64_t first_stage_points = 0;  // |X cap V| visited
  std::int64_t subsets_evaluated = 0;
};

// Second-stage value nu(x) = min over K-subsets of recourses feasible at x of
// the exact inner value. Infinity when no recourse is feasible at x.
OracleResult second_stage_value(const KAdaptInstance& inst, std::span<const double> x, int K,
                                const OracleBudget& budget = {});

// Full enumeration over first-stage points, K-subsets and exact inner
// evaluation. Handles integer first stages, scenario-dependent and
// independent first-stage cost uncertainty and both variants.
OracleResult brute_force_solve(const KAdaptInstance& inst, int K,
                               const OracleBudget& budget = {});

// First-stage points of the instance (integer points when x is general
// integer), in lexicographic order.
BinaryPoints enumerate_first_stage(const KAdaptInstance& inst, const OracleBudget& budget = {});

// Recourse points of Y_poly feasible at x (constraint variant: for at least
// one scenario). Exact count before any dominance reduction.
BinaryPoints feasible_recourses(const KAdaptInstance& inst, std::span<const double> x,
                                const OracleBudget& budget = {});

}  // namespace kadapt

#endif  // KADAPT_ORACLE_HPP_
