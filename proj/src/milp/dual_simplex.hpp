// Internal LP engine shared by solve_lp and the branch-and-bound driver.

#ifndef KADAPT_SRC_MILP_DUAL_SIMPLEX_HPP_
#define KADAPT_SRC_MILP_DUAL_SIMPLEX_HPP_

#include <chrono>
#include <cstdint>
#include <vector>

#include "kadapt/milp.hpp"

namespace kadapt::milp::internal {

class Deadline {
 public:
  explicit Deadline(double seconds);
  bool expired() const;
  double elapsed() const;

 private:
  std::chrono::steady_clock::time_point start_;
  double seconds_;
};

// A x + s = rhs with boxed columns. Structural columns come first, then one
// slack per row. The objective is always minimized; maximization models are
// negated on the way in.
struct StandardForm {
  int rows = 0;
  int cols = 0;  // structural columns
  std::vector<int> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> rhs;
  std::vector<double> lo;    // cols + rows entries
  std::vector<double> hi;    // cols + rows entries
  std::vector<double> cost;  // cols entries
  double cost_sign = 1.0;    // +1 minimize, -1 maximize
};

StandardForm to_standard_form(const MilpModel& model);

enum class LpOutcome { kOptimal, kInfeasible, kCutoff, kTimeLimit };

struct Basis {
  std::vector<int> head;
  std::vector<std::uint8_t> at_upper;
};

class DualSimplex {
 public:
  explicit DualSimplex(const StandardForm& lp);

  void set_bounds(int j, double lo, double hi) {
    lo_[j] = lo;
    hi_[j] = hi;
  }
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  // Runs the dual simplex from the current basis. Stops early with kCutoff
  // once the (monotone) dual objective exceeds `cutoff`.
  LpOutcome solve(double cutoff, const Deadline& deadline);

  double objective() const { return objective_; }
  const std::vector<double>& values() const { return x_; }
  // Row duals of the internal minimization.
  const std::vector<double>& row_duals() const { return y_; }
  std::int64_t iterations() const { return iterations_; }

  Basis basis() const;
  void load_basis(const Basis& basis);

 private:
  int total() const { return lp_.cols + lp_.rows; }
  double column_dot(const double* vec, int j) const;
  void ftran(int j, std::vector<double>& out) const;
  void refactor();
  void reset_to_slack_basis();
  void compute_duals();
  void fix_dual_feasibility();
  void compute_primal();

  const StandardForm& lp_;
  std::vector<double> lo_, hi_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<std::uint8_t> at_upper_;
  std::vector<double> binv_;
  std::vector<double> x_, y_, d_;
  std::vector<double> work_;
  double objective_ = 0.0;
  int updates_since_refactor_ = 0;
  std::int64_t iterations_ = 0;
};

}  // namespace kadapt::milp::internal

#endif  // KADAPT_SRC_MILP_DUAL_SIMPLEX_HPP_
