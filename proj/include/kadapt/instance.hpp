// Problem data for K-adaptable two-stage robust binary programs
//
//   min_{x in X}  c'x + max_{w in Omega} w'Cx
//        + min_{y^1..y^K in Y(x)} max_{xi in Xi} min_k xi'Q y^k
//
// with Y(x) = {y binary in Y_poly : W y <= b - T x}. Under constraint
// uncertainty W is replaced by W(xi) = W0 + sum_l xi_l W_l and a recourse only
// counts for the scenarios under which it stays feasible.
//
// Affine scenario costs (nominal + deviation) are represented by fixing
// coordinate 0 of xi to 1 through its box bounds, so that every cost stays in
// the bilinear xi'Qy form.

#ifndef KADAPT_INSTANCE_HPP_
#define KADAPT_INSTANCE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kadapt/milp.hpp"

namespace kadapt {

// Dense row-major matrix. Instances in this library are small enough that
// dense storage is the simplest correct choice.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)};
  }
  std::span<double> row(int i) {
    return {data_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)};
  }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> multiply(std::span<const double> v) const;            // A v
  std::vector<double> multiply_transposed(std::span<const double> v) const;  // A' v
  bool is_zero() const;
  void append_row(std::span<const double> values);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// {z : A z (sense) rhs}, row by row.
struct Polytope {
  Matrix lhs;
  std::vector<milp::RowSense> sense;
  std::vector<double> rhs;

  static Polytope empty(int dim) { return Polytope{Matrix(0, dim), {}, {}}; }
  int num_rows() const { return lhs.rows(); }
  int dim() const { return lhs.cols(); }
  void add_row(std::span<const double> coefs, milp::RowSense s, double b);
  // Largest violation of any row at z (0 when z satisfies every row).
  double violation(std::span<const double> z) const;

  friend bool operator==(const Polytope&, const Polytope&) = default;
};

// Polyhedral uncertainty set: rows plus an explicit box.
struct UncertaintySet {
  Polytope rows;
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> xi, double tol = milp::kFeasibilityTol) const;

  friend bool operator==(const UncertaintySet&, const UncertaintySet&) = default;
};

enum class Variant : std::uint8_t { kObjective, kConstraint };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

// Uncertainty in the first-stage objective. When `dependent` is false the
// term is max_{w in omega} w'Cx with C of size d x n. When true, C has q rows
// and the same xi that drives the recourse cost multiplies Cx as well.
struct FirstStageUncertainty {
  Matrix cost_map;
  UncertaintySet omega;
  bool dependent = false;

  friend bool operator==(const FirstStageUncertainty&,
                         const FirstStageUncertainty&) = default;
};

struct KAdaptInstance {
  std::string name;
  std::string family;
  std::uint64_t seed = 0;

  int n = 0;  // first-stage dimension
  int m = 0;  // recourse dimension
  int q = 0;  // scenario dimension
  int K = 1;

  std::vector<double> first_stage_cost;  // c, n entries
  Matrix recourse_cost;                  // Q, q x m
  Matrix coupling_first;                 // T, s x n
  Matrix coupling_recourse;              // W (W0 under constraint uncertainty), s x m
  std::vector<double> coupling_rhs;      // b, s entries
  std::vector<Matrix> coupling_uncertain;  // W_l, q matrices of s x m

  Polytope first_stage_set;  // over x
  Polytope recourse_set;     // over y
  UncertaintySet scenario_set;

  Variant variant = Variant::kObjective;
  bool xi0_augmented = false;
  // Non-empty when x is general integer with 0 <= x_i <= ub_i.
  std::vector<int> integer_upper;
  std::optional<FirstStageUncertainty> first_stage_uncertainty;
  // The stored problem is the negation of a maximization problem.
  bool negated_objective = false;

  int s() const { return static_cast<int>(coupling_rhs.size()); }
  bool integer_first_stage() const { return !integer_upper.empty(); }
  bool dependent_first_stage() const {
    return first_stage_uncertainty && first_stage_uncertainty->dependent;
  }

  friend bool operator==(const KAdaptInstance&, const KAdaptInstance&) = default;
};

// Throws ModelError on dimension inconsistencies, non-finite data, an empty
// or unbounded scenario set, or a violated xi0 convention. With
// `check_feasible_sets` the first-stage and recourse polytopes are also
// checked for binary feasibility by MILP.
void validate(const KAdaptInstance& inst, bool check_feasible_sets = false);

// Per-coordinate range of the scenario set, from two LPs per coordinate.
struct ScenarioHull {
  std::vector<double> lo;
  std::vector<double> hi;
};
ScenarioHull scenario_hull(const UncertaintySet& set);

// Small evaluation helpers shared by the solver, the oracle and the tests.
double scenario_cost(const KAdaptInstance& inst, std::span<const double> xi,
                     std::span<const double> y);  // xi'Qy
// Qy, the cost vector over scenario coordinates of one recourse.
std::vector<double> recourse_cost_vector(const KAdaptInstance& inst,
                                         std::span<const double> y);
std::vector<double> recourse_rhs(const KAdaptInstance& inst,
                                 std::span<const double> x);  // b - Tx
// W(xi) as a dense matrix; W0 when xi is empty or the variant has no W_l.
Matrix coupling_at(const KAdaptInstance& inst, std::span<const double> xi);
// Whether y lies in Y_poly and satisfies W(xi) y <= b - Tx (xi empty: W0).
bool recourse_feasible(const KAdaptInstance& inst, std::span<const double> x,
                       std::span<const double> y,
                       std::span<const double> xi = {},
                       double tol = milp::kFeasibilityTol);
// Under constraint uncertainty a recourse counts as violated by a scenario
// when some coupling row exceeds its right-hand side by at least this margin
// (scaled by the row's magnitude so that exact boundary points stay feasible).
double violation_margin(const KAdaptInstance& inst, int row);
// The nominal scenario: box midpoint (coordinate 0 stays at 1 when
// augmented), projected onto the set in the L1 sense when outside it.
std::vector<double> nominal_scenario(const KAdaptInstance& inst);

// On-disk format: one JSON document per instance.
KAdaptInstance load_instance(const std::string& path);
void save_instance(const KAdaptInstance& inst, const std::string& path);
KAdaptInstance instance_from_json_text(std::string_view text);
std::string instance_to_json_text(const KAdaptInstance& inst);

// Splittable 64-bit generator (SplitMix64). `split` derives an independent
// stream so that every random component of a run can be reproduced from one
// seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi);  // inclusive range
  SplitMix64 split() { return SplitMix64(next() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  std::uint64_t state_;
};

struct ShortestPathParams {
  int num_nodes = 20;
  double gamma = 3.0;
  int out_degree = 3;
  int K = 2;
};
KAdaptInstance generate_shortest_path(const ShortestPathParams& params,
                                      std::uint64_t seed);

struct KnapsackParams {
  int items = 100;
  int K = 2;
  int factors = 0;               // 0 -> max(1, ceil(items / 10))
  double budget_fraction = 0.35;
  double weight_lo = 10, weight_hi = 100;
  double profit_lo = 10, profit_hi = 100;
};
KAdaptInstance generate_knapsack(const KnapsackParams& params, std::uint64_t seed);

struct GenericParams {
  int n = 20;
  int m = 20;
  double gamma = 3.0;
  int K = 2;
  int b = 0;  // selected first-stage count; 0 -> min(10, n)
  double coupling_level = 0.0;  // l in  d'x + f'y >= l
  // Recourse cost c_j = cbar_j + sign * xi_j * chat_j. The default generator
  // uses a negative sign.
  double deviation_sign = -1.0;
  double deviation_fraction = 0.25;
};
KAdaptInstance generate_generic(const GenericParams& params, std::uint64_t seed);

// Small random instances for cross-checks against the oracle. Families are
// "shortest-path" (at most max_dim + 1 nodes, capped at 6), "knapsack" (at
// most max_dim + 3 items, capped at 8) and "generic" (n, m <= max_dim, with
// a binding coupling row and increasing cost deviations). The constraint
// variant adds scenario-dependent coupling coefficients (generic: eroding
// recourse capacity; knapsack: growing weights; shortest path: growing arc
// risk under a risk budget).
KAdaptInstance generate_tiny(std::string_view family, Variant variant, int max_dim, int K,
                             std::uint64_t seed);

// The same instance in the constraint-uncertainty variant with every W_l = 0.
KAdaptInstance with_zero_constraint_uncertainty(const KAdaptInstance& inst);

// Replaces general-integer first-stage variables by their base-2 bits.
struct BinaryExpansion {
  KAdaptInstance instance;
  // bits[i] lists the binary variables of original x_i, least significant
  // first; variable bits[i][p] carries weight 2^p.
  std::vector<std::vector<int>> bits;

  std::vector<double> to_integer(std::span<const double> binary_x) const;
  std::vector<double> to_binary(std::span<const double> integer_x) const;
};
BinaryExpansion binary_expand(const KAdaptInstance& inst);
int bits_for_upper(int ub);

// Moves a first-stage cost driven by the recourse scenario xi into the
// recourse: y_bar = (copy of x, y), Q_bar = [C, Q], with rows enforcing that
// the copy equals x.
KAdaptInstance lift_dependent_first_stage(const KAdaptInstance& inst);

}  // namespace kadapt

#endif  // KADAPT_INSTANCE_HPP_
