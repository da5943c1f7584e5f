// Backend-agnostic (mixed binary) linear programming models and the embedded
// solver used by every other part of the library.
//
// All variables carry finite bounds. Continuous LPs are solved with a bounded
// dual simplex; mixed binary programs with best-bound branch-and-bound on top
// of it. The text export follows the common CPLEX-style LP file layout so that
// models can be cross-checked with third-party solvers.

#ifndef KADAPT_MILP_HPP_
#define KADAPT_MILP_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kadapt {

// Raised for malformed input of any kind (bad indices, NaNs, dimension
// mismatches, schema violations).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kFeasibilityTol = 1e-7;
inline constexpr double kIntegralityTol = 1e-6;

enum class VarKind : std::uint8_t { kContinuous, kBinary };
enum class RowSense : std::uint8_t { kLessEqual, kEqual, kGreaterEqual };
enum class ObjectiveSense : std::uint8_t { kMinimize, kMaximize };
enum class SolveStatus : std::uint8_t {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kTimeLimit
};

std::string_view to_string(SolveStatus status);
std::string_view to_string(RowSense sense);

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Variable {
  double lo = 0.0;
  double hi = 0.0;
  VarKind kind = VarKind::kContinuous;
  std::string name;
};

struct Row {
  std::vector<Term> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

class MilpModel {
 public:
  int add_variable(double lo, double hi, VarKind kind, std::string name = {});
  int add_continuous(double lo, double hi, std::string name = {}) {
    return add_variable(lo, hi, VarKind::kContinuous, std::move(name));
  }
  int add_binary(std::string name = {}) {
    return add_variable(0.0, 1.0, VarKind::kBinary, std::move(name));
  }
  void set_bounds(int var, double lo, double hi);

  void add_row(std::vector<Term> terms, RowSense sense, double rhs,
               std::string name = {});

  void set_objective(std::vector<Term> terms, double constant = 0.0,
                     ObjectiveSense sense = ObjectiveSense::kMinimize);
  void set_objective_sense(ObjectiveSense sense) { sense_ = sense; }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& variable(int j) const { return vars_.at(j); }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<Term>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }
  ObjectiveSense sense() const { return sense_; }
  bool all_continuous() const;
  int num_binaries() const;

  // Throws ModelError when an index is out of range, a coefficient or bound
  // is not finite, or a binary variable has bounds outside [0, 1].
  void validate() const;

  double evaluate_objective(std::span<const double> values) const;
  // Largest violation of bounds, rows and (for binaries) integrality.
  double max_violation(std::span<const double> values) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<Term> objective_;
  double objective_constant_ = 0.0;
  ObjectiveSense sense_ = ObjectiveSense::kMinimize;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  // Objective of the returned point (model sense, constant included).
  double objective = std::numeric_limits<double>::quiet_NaN();
  // Best proven bound in the model's sense. For LPs solved to optimality this
  // is the dual objective at termination.
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;
  // Row duals (LP only), signed so that
  //   sum_i y_i rhs_i + sum_j opt_{x_j in [lo,hi]} (c_j - a_j'y) x_j
  // is the dual objective, with opt = min for minimization, max otherwise.
  std::vector<double> duals;
  std::int64_t node_count = 0;
  std::int64_t simplex_iterations = 0;
  double wall_time = 0.0;

  bool has_incumbent() const { return status == SolveStatus::kOptimal || !values.empty(); }
  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolveLimits {
  double time_limit = kInfinity;  // seconds
  double relative_gap = 0.0;      // (incumbent - bound) / max(1, |incumbent|)
  // Branch-and-bound nodes before stopping as if the time limit were hit;
  // negative means unlimited. Unlike the time limit it is deterministic.
  std::int64_t node_limit = -1;
};

// Requires every variable to be continuous.
MilpSolution solve_lp(const MilpModel& model);
MilpSolution solve_lp(const MilpModel& model, const SolveLimits& limits);
MilpSolution solve_milp(const MilpModel& model, const SolveLimits& limits = {});

std::string export_lp_text(const MilpModel& model);
// Reads the subset of the LP format produced by export_lp_text (plus the
// usual variants: free-form whitespace, optional row names, one-sided bounds).
MilpModel parse_lp_text(std::string_view text);

}  // namespace milp
}  // namespace kadapt

#endif  // KADAPT_MILP_HPP_
