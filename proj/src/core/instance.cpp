#include "kadapt/instance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/model_util.hpp"

namespace kadapt {

using milp::MilpModel;
using milp::RowSense;
using milp::SolveStatus;

std::vector<double> Matrix::multiply(std::span<const double> v) const {
  std::vector<double> out(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (int j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> Matrix::multiply_transposed(std::span<const double> v) const {
  std::vector<double> out(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    if (v[i] == 0.0) continue;
    for (int j = 0; j < cols_; ++j) out[j] += (*this)(i, j) * v[i];
  }
  return out;
}

bool Matrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

void Matrix::append_row(std::span<const double> values) {
  if (static_cast<int>(values.size()) != cols_) {
    throw ModelError("row length " + std::to_string(values.size()) +
                     " does not match matrix width " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void Polytope::add_row(std::span<const double> coefs, RowSense s, double b) {
  lhs.append_row(coefs);
  sense.push_back(s);
  rhs.push_back(b);
}

double Polytope::violation(std::span<const double> z) const {
  double worst = 0.0;
  for (int i = 0; i < num_rows(); ++i) {
    double act = 0.0;
    for (int j = 0; j < dim(); ++j) act += lhs(i, j) * z[j];
    double v = 0.0;
    switch (sense[i]) {
      case RowSense::kLessEqual: v = act - rhs[i]; break;
      case RowSense::kGreaterEqual: v = rhs[i] - act; break;
      case RowSense::kEqual: v = std::abs(act - rhs[i]); break;
    }
    worst = std::max(worst, v);
  }
  return worst;
}

bool UncertaintySet::contains(std::span<const double> xi, double tol) const {
  if (static_cast<int>(xi.size()) != dim()) return false;
  for (int l = 0; l < dim(); ++l) {
    if (xi[l] < lo[l] - tol || xi[l] > hi[l] + tol) return false;
  }
  return rows.violation(xi) <= tol;
}

std::string_view to_string(Variant v) {
  return v == Variant::kObjective ? "objective" : "constraint";
}

Variant parse_variant(std::string_view text) {
  if (text == "objective") return Variant::kObjective;
  if (text == "constraint") return Variant::kConstraint;
  throw ModelError("unknown variant '" + std::string(text) + "'");
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

void check_shape(const Matrix& a, int rows, int cols, const char* what) {
  require(a.rows() == rows && a.cols() == cols,
          std::string(what) + " has shape " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + ", expected " + std::to_string(rows) + "x" +
              std::to_string(cols));
  for (double v : a.data()) require(std::isfinite(v), std::string(what) + " has a non-finite entry");
}

void check_vector(const std::vector<double>& v, int size, const char* what) {
  require(static_cast<int>(v.size()) == size,
          std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
              std::to_string(size));
  for (double e : v) require(std::isfinite(e), std::string(what) + " has a non-finite entry");
}

void check_polytope(const Polytope& p, int dim, const char* what) {
  require(p.dim() == dim, std::string(what) + " has dimension " + std::to_string(p.dim()) +
                              ", expected " + std::to_string(dim));
  check_shape(p.lhs, p.num_rows(), dim, what);
  require(static_cast<int>(p.sense.size()) == p.num_rows() &&
              static_cast<int>(p.rhs.size()) == p.num_rows(),
          std::string(what) + " has inconsistent row data");
  check_vector(p.rhs, p.num_rows(), what);
}

void check_uncertainty_set(const UncertaintySet& u, int dim, const char* what) {
  check_vector(u.lo, dim, what);
  check_vector(u.hi, dim, what);
  for (int l = 0; l < dim; ++l) {
    require(u.lo[l] <= u.hi[l], std::string(what) + " has an empty box in coordinate " +
                                    std::to_string(l));
  }
  check_polytope(u.rows, dim, what);
}

MilpModel hull_model(const UncertaintySet& set) {
  MilpModel model;
  internal::add_scenario_block(model, set);
  return model;
}

}  // namespace

ScenarioHull scenario_hull(const UncertaintySet& set) {
  // The box makes the set bounded; the LPs detect emptiness and tighten it.
  MilpModel model = hull_model(set);
  if (model.num_vars() > 0 && milp::solve_lp(model).status == SolveStatus::kInfeasible) {
    throw ModelError("uncertainty set is empty");
  }
  ScenarioHull hull{set.lo, set.hi};
  if (set.rows.num_rows() == 0) return hull;
  for (int l = 0; l < set.dim(); ++l) {
    if (set.lo[l] == set.hi[l]) continue;
    for (int dir = 0; dir < 2; ++dir) {
      model.set_objective({{l, 1.0}}, 0.0,
                          dir == 0 ? milp::ObjectiveSense::kMinimize
                                   : milp::ObjectiveSense::kMaximize);
      const auto sol = milp::solve_lp(model);
      if (!sol.optimal()) throw ModelError("uncertainty set bound could not be computed");
      if (dir == 0) {
        hull.lo[l] = std::max(set.lo[l], sol.objective);
      } else {
        hull.hi[l] = std::min(set.hi[l], sol.objective);
      }
    }
    if (hull.lo[l] > hull.hi[l]) hull.lo[l] = hull.hi[l] = 0.5 * (hull.lo[l] + hull.hi[l]);
  }
  return hull;
}

void validate(const KAdaptInstance& inst, bool check_feasible_sets) {
  require(inst.n >= 0 && inst.m >= 0 && inst.q >= 0, "negative dimension");
  require(inst.K >= 1, "K must be at least 1");
  const int s = inst.s();
  check_vector(inst.first_stage_cost, inst.n, "first-stage cost c");
  check_shape(inst.recourse_cost, inst.q, inst.m, "recourse cost Q");
  check_shape(inst.coupling_first, s, inst.n, "coupling matrix T");
  check_shape(inst.coupling_recourse, s, inst.m, "coupling matrix W");
  check_vector(inst.coupling_rhs, s, "coupling rhs b");
  if (inst.variant == Variant::kConstraint) {
    require(static_cast<int>(inst.coupling_uncertain.size()) == inst.q,
            "constraint uncertainty needs one W_l per scenario coordinate");
    for (const Matrix& wl : inst.coupling_uncertain) check_shape(wl, s, inst.m, "W_l");
  } else {
    require(inst.coupling_uncertain.empty(), "W_l given for the objective-only variant");
  }
  check_polytope(inst.first_stage_set, inst.n, "first-stage set");
  check_polytope(inst.recourse_set, inst.m, "recourse set");
  check_uncertainty_set(inst.scenario_set, inst.q, "uncertainty set");
  if (inst.xi0_augmented) {
    require(inst.q >= 1 && inst.scenario_set.lo[0] == 1.0 && inst.scenario_set.hi[0] == 1.0,
            "augmented coordinate 0 must be fixed to 1 by its box");
  }
  if (inst.integer_first_stage()) {
    require(static_cast<int>(inst.integer_upper.size()) == inst.n,
            "integer upper bounds must cover every first-stage variable");
    for (int ub : inst.integer_upper) require(ub >= 0, "negative integer upper bound");
  }
  if (inst.first_stage_uncertainty) {
    const FirstStageUncertainty& fs = *inst.first_stage_uncertainty;
    if (fs.dependent) {
      check_shape(fs.cost_map, inst.q, inst.n, "first-stage cost map C");
    } else {
      check_shape(fs.cost_map, fs.cost_map.rows(), inst.n, "first-stage cost map C");
      check_uncertainty_set(fs.omega, fs.cost_map.rows(), "first-stage uncertainty set");
      scenario_hull(fs.omega);
    }
  }
  scenario_hull(inst.scenario_set);

  if (!check_feasible_sets) return;
  {
    MilpModel model;
    if (inst.integer_first_stage()) {
      const BinaryExpansion ex = binary_expand(inst);
      internal::add_binaries(model, ex.instance.n);
      internal::add_polytope_rows(model, ex.instance.first_stage_set, 0);
    } else {
      internal::add_binaries(model, inst.n);
      internal::add_polytope_rows(model, inst.first_stage_set, 0);
    }
    require(milp::solve_milp(model).optimal(), "first-stage set has no binary point");
  }
  {
    MilpModel model;
    internal::add_binaries(model, inst.m);
    internal::add_polytope_rows(model, inst.recourse_set, 0);
    require(milp::solve_milp(model).optimal(), "recourse set has no binary point");
  }
}

double scenario_cost(const KAdaptInstance& inst, std::span<const double> xi,
                     std::span<const double> y) {
  double total = 0.0;
  for (int l = 0; l < inst.q; ++l) {
    if (xi[l] == 0.0) continue;
    double acc = 0.0;
    for (int j = 0; j < inst.m; ++j) acc += inst.recourse_cost(l, j) * y[j];
    total += xi[l] * acc;
  }
  return total;
}

std::vector<double> recourse_cost_vector(const KAdaptInstance& inst,
                                         std::span<const double> y) {
  return inst.recourse_cost.multiply(y);
}

std::vector<double> recourse_rhs(const KAdaptInstance& inst, std::span<const double> x) {
  std::vector<double> rhs = inst.coupling_rhs;
  const std::vector<double> tx = inst.coupling_first.multiply(x);
  for (int i = 0; i < inst.s(); ++i) rhs[i] -= tx[i];
  return rhs;
}

Matrix coupling_at(const KAdaptInstance& inst, std::span<const double> xi) {
  Matrix w = inst.coupling_recourse;
  if (xi.empty() || inst.variant != Variant::kConstraint) return w;
  for (int l = 0; l < inst.q; ++l) {
    if (xi[l] == 0.0) continue;
    const Matrix& wl = inst.coupling_uncertain[l];
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) w(i, j) += xi[l] * wl(i, j);
    }
  }
  return w;
}

bool recourse_feasible(const KAdaptInstance& inst, std::span<const double> x,
                       std::span<const double> y, std::span<const double> xi,
                       double tol) {
  if (inst.recourse_set.violation(y) > tol) return false;
  const std::vector<double> rhs = recourse_rhs(inst, x);
  const std::vector<double> wy = coupling_at(inst, xi).multiply(y);
  for (int i = 0; i < inst.s(); ++i) {
    if (wy[i] > rhs[i] + tol) return false;
  }
  return true;
}

double violation_margin(const KAdaptInstance& inst, int row) {
  double magnitude = std::abs(inst.coupling_rhs[row]);
  for (int j = 0; j < inst.m; ++j) {
    magnitude += std::abs(inst.coupling_recourse(row, j));
    if (inst.variant != Variant::kConstraint) continue;
    for (int l = 0; l < inst.q; ++l) {
      const double reach =
          std::max(std::abs(inst.scenario_set.lo[l]), std::abs(inst.scenario_set.hi[l]));
      magnitude += reach * std::abs(inst.coupling_uncertain[l](row, j));
    }
  }
  return 1e-4 * (1.0 + magnitude);
}

std::vector<double> nominal_scenario(const KAdaptInstance& inst) {
  const UncertaintySet& set = inst.scenario_set;
  std::vector<double> mid(inst.q);
  for (int l = 0; l < inst.q; ++l) mid[l] = 0.5 * (set.lo[l] + set.hi[l]);
  if (set.contains(mid, 1e-9)) return mid;

  // min sum_l t_l  s.t.  t >= xi - mid, t >= mid - xi, xi in the set.
  MilpModel model;
  const int xi = internal::add_scenario_block(model, set);
  std::vector<milp::Term> objective;
  for (int l = 0; l < inst.q; ++l) {
    const int t = model.add_continuous(0.0, set.hi[l] - set.lo[l]);
    model.add_row({{t, 1.0}, {xi + l, -1.0}}, RowSense::kGreaterEqual, -mid[l]);
    model.add_row({{t, 1.0}, {xi + l, 1.0}}, RowSense::kGreaterEqual, mid[l]);
    objective.push_back({t, 1.0});
  }
  model.set_objective(std::move(objective));
  const auto sol = milp::solve_lp(model);
  if (!sol.optimal()) throw ModelError("uncertainty set is empty");
  std::vector<double> out(sol.values.begin() + xi, sol.values.begin() + xi + inst.q);
  for (int l = 0; l < inst.q; ++l) out[l] = std::clamp(out[l], set.lo[l], set.hi[l]);
  return out;
}

}  // namespace kadapt
