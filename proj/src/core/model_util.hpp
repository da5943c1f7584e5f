// Helpers for assembling MILPs out of instance data.

#ifndef KADAPT_SRC_CORE_MODEL_UTIL_HPP_
#define KADAPT_SRC_CORE_MODEL_UTIL_HPP_

#include <chrono>
#include <span>
#include <vector>

#include "kadapt/instance.hpp"
#include "kadapt/milp.hpp"

namespace kadapt::internal {

// Adds binary variables and returns the index of the first one.
int add_binaries(milp::MilpModel& model, int count);
int add_continuous_block(milp::MilpModel& model, std::span<const double> lo,
                         std::span<const double> hi);

// Adds the rows of `poly` over variables first..first+dim-1.
void add_polytope_rows(milp::MilpModel& model, const Polytope& poly, int first);

// Adds sum_j a_j z_{first+j} (sense) rhs, skipping zero coefficients.
void add_dense_row(milp::MilpModel& model, std::span<const double> coefs, int first,
                   milp::RowSense sense, double rhs);

// Adds a scenario block (box bounds and rows) and returns its first index.
int add_scenario_block(milp::MilpModel& model, const UncertaintySet& set);

// Adds one recourse copy: m binaries restricted to Y_poly and to the
// nominal coupling rows W y <= rhs. Returns the first index.
int add_recourse_copy(milp::MilpModel& model, const KAdaptInstance& inst,
                      std::span<const double> coupling_rhs);

// Interval bounds of a'z over z in the box [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval linear_range(std::span<const double> a, std::span<const double> lo,
                      std::span<const double> hi);

// Range of xi'Qy over the scenario hull and binary y in [0,1]^m.
Interval scenario_cost_range(const KAdaptInstance& inst, const ScenarioHull& hull);

// Thresholds on W(xi)_i y under constraint uncertainty, all within the row's
// violation margin above rhs_i and ordered
//   feasibility_threshold < violation_threshold < rhs_i + margin_i.
// Models that must keep a recourse usable impose the first; a recourse counts
// as violated above the second; the adversary's indicators demand the third.
// The gaps are far larger than the solver's feasibility tolerance.
double feasibility_threshold(const KAdaptInstance& inst, int row, double rhs);
double violation_threshold(const KAdaptInstance& inst, int row, double rhs);

// Adds, for recourse y, per-row binaries delta_i that may only be 1 when row i
// of W(xi) y reaches rhs_i plus the violation margin, xi being the scenario
// block starting at `xi`. Rows that no scenario in the box can violate get no
// indicator. Returns the indicator indices.
std::vector<int> add_violation_indicators(milp::MilpModel& model, const KAdaptInstance& inst,
                                          int xi, std::span<const double> y,
                                          std::span<const double> rhs);

// Wall-clock budget shared by a chain of solves.
class Deadline {
 public:
  explicit Deadline(double seconds)
      : start_(std::chrono::steady_clock::now()), limit_(seconds) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  double remaining() const { return limit_ - elapsed(); }
  bool expired() const { return remaining() <= 0.0; }

 private:
  std::chrono::steady_clock::time_point start_;
  double limit_;
};

// Values of a binary block rounded to exact 0/1.
std::vector<double> binary_block(const std::vector<double>& values, int first, int count);

}  // namespace kadapt::internal

#endif  // KADAPT_SRC_CORE_MODEL_UTIL_HPP_
