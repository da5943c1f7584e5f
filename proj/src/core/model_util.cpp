#include "core/model_util.hpp"

#include <algorithm>
#include <cmath>

namespace kadapt::internal {

using milp::MilpModel;
using milp::RowSense;
using milp::Term;

int add_binaries(MilpModel& model, int count) {
  const int first = model.num_vars();
  for (int j = 0; j < count; ++j) model.add_binary();
  return first;
}

int add_continuous_block(MilpModel& model, std::span<const double> lo,
                         std::span<const double> hi) {
  const int first = model.num_vars();
  for (size_t j = 0; j < lo.size(); ++j) model.add_continuous(lo[j], hi[j]);
  return first;
}

void add_dense_row(MilpModel& model, std::span<const double> coefs, int first,
                   RowSense sense, double rhs) {
  std::vector<Term> terms;
  for (size_t j = 0; j < coefs.size(); ++j) {
    if (coefs[j] != 0.0) terms.push_back({first + static_cast<int>(j), coefs[j]});
  }
  model.add_row(std::move(terms), sense, rhs);
}

void add_polytope_rows(MilpModel& model, const Polytope& poly, int first) {
  for (int i = 0; i < poly.num_rows(); ++i) {
    add_dense_row(model, poly.lhs.row(i), first, poly.sense[i], poly.rhs[i]);
  }
}

int add_scenario_block(MilpModel& model, const UncertaintySet& set) {
  const int first = add_continuous_block(model, set.lo, set.hi);
  add_polytope_rows(model, set.rows, first);
  return first;
}

int add_recourse_copy(MilpModel& model, const KAdaptInstance& inst,
                      std::span<const double> coupling_rhs) {
  const int first = add_binaries(model, inst.m);
  add_polytope_rows(model, inst.recourse_set, first);
  for (int i = 0; i < inst.s(); ++i) {
    add_dense_row(model, inst.coupling_recourse.row(i), first, RowSense::kLessEqual,
                  coupling_rhs[i]);
  }
  return first;
}

Interval linear_range(std::span<const double> a, std::span<const double> lo,
                      std::span<const double> hi) {
  Interval r;
  for (size_t j = 0; j < a.size(); ++j) {
    r.lo += std::min(a[j] * lo[j], a[j] * hi[j]);
    r.hi += std::max(a[j] * lo[j], a[j] * hi[j]);
  }
  return r;
}

Interval scenario_cost_range(const KAdaptInstance& inst, const ScenarioHull& hull) {
  // Each product xi_l Q_lj y_j ranges over the hull of its corner values.
  Interval r;
  for (int l = 0; l < inst.q; ++l) {
    for (int j = 0; j < inst.m; ++j) {
      const double a = inst.recourse_cost(l, j);
      if (a == 0.0) continue;
      const double u = a * hull.lo[l], v = a * hull.hi[l];
      r.lo += std::min({0.0, u, v});
      r.hi += std::max({0.0, u, v});
    }
  }
  return r;
}

double feasibility_threshold(const KAdaptInstance& inst, int row, double rhs) {
  return rhs + 0.99 * violation_margin(inst, row);
}

double violation_threshold(const KAdaptInstance& inst, int row, double rhs) {
  return rhs + 0.995 * violation_margin(inst, row);
}

std::vector<int> add_violation_indicators(MilpModel& model, const KAdaptInstance& inst, int xi,
                                          std::span<const double> y,
                                          std::span<const double> rhs) {
  std::vector<int> deltas;
  for (int i = 0; i < inst.s(); ++i) {
    double constant = 0.0;
    for (int j = 0; j < inst.m; ++j) constant += inst.coupling_recourse(i, j) * y[j];
    std::vector<double> a(inst.q, 0.0);
    for (int l = 0; l < inst.q; ++l) {
      for (int j = 0; j < inst.m; ++j) a[l] += inst.coupling_uncertain[l](i, j) * y[j];
    }
    const Interval r = linear_range(a, inst.scenario_set.lo, inst.scenario_set.hi);
    const double target = rhs[i] + violation_margin(inst, i) - constant;
    if (r.hi < target) continue;
    const int delta = model.add_binary();
    // a'xi >= target - M (1 - delta)
    const double big_m = std::max(0.0, target - r.lo) + 1.0;
    std::vector<Term> terms{{delta, -big_m}};
    for (int l = 0; l < inst.q; ++l) {
      if (a[l] != 0.0) terms.push_back({xi + l, a[l]});
    }
    model.add_row(std::move(terms), RowSense::kGreaterEqual, target - big_m);
    deltas.push_back(delta);
  }
  return deltas;
}

std::vector<double> binary_block(const std::vector<double>& values, int first, int count) {
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = std::round(values[first + j]);
  return out;
}

}  // namespace kadapt::internal
