#include <cmath>
#include <string>

#include "kadapt/instance.hpp"

namespace kadapt {

using milp::RowSense;

int bits_for_upper(int ub) {
  if (ub < 0) throw ModelError("integer upper bound must be nonnegative");
  int bits = 0;
  while ((1LL << bits) - 1 < ub) ++bits;
  return bits;
}

namespace {

// Rewrites the columns of a matrix over x as columns over the bits of x.
Matrix expand_columns(const Matrix& a, const std::vector<std::vector<int>>& bits, int width) {
  Matrix out(a.rows(), width);
  for (int i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < bits.size(); ++j) {
      for (size_t p = 0; p < bits[j].size(); ++p) {
        out(i, bits[j][p]) = a(i, j) * std::ldexp(1.0, static_cast<int>(p));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> BinaryExpansion::to_integer(std::span<const double> binary_x) const {
  std::vector<double> x(bits.size(), 0.0);
  for (size_t i = 0; i < bits.size(); ++i) {
    for (size_t p = 0; p < bits[i].size(); ++p) {
      x[i] += std::ldexp(std::round(binary_x[bits[i][p]]), static_cast<int>(p));
    }
  }
  return x;
}

std::vector<double> BinaryExpansion::to_binary(std::span<const double> integer_x) const {
  std::vector<double> u(instance.n, 0.0);
  for (size_t i = 0; i < bits.size(); ++i) {
    const auto v = static_cast<long long>(std::llround(integer_x[i]));
    if (v < 0 || v >= (1LL << bits[i].size())) {
      throw ModelError("integer value " + std::to_string(v) + " does not fit its bits");
    }
    for (size_t p = 0; p < bits[i].size(); ++p) u[bits[i][p]] = (v >> p) & 1;
  }
  return u;
}

BinaryExpansion binary_expand(const KAdaptInstance& inst) {
  BinaryExpansion ex;
  if (!inst.integer_first_stage()) {
    ex.instance = inst;
    for (int i = 0; i < inst.n; ++i) ex.bits.push_back({i});
    return ex;
  }
  if (static_cast<int>(inst.integer_upper.size()) != inst.n) {
    throw ModelError("integer upper bounds must cover every first-stage variable");
  }
  int width = 0;
  for (int i = 0; i < inst.n; ++i) {
    const int p = bits_for_upper(inst.integer_upper[i]);
    std::vector<int> ids;
    for (int k = 0; k < p; ++k) ids.push_back(width++);
    ex.bits.push_back(std::move(ids));
  }

  KAdaptInstance out = inst;
  out.n = width;
  out.integer_upper.clear();
  out.name = inst.name.empty() ? inst.name : inst.name + "-bin";
  out.first_stage_cost.assign(width, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    for (size_t p = 0; p < ex.bits[i].size(); ++p) {
      out.first_stage_cost[ex.bits[i][p]] =
          inst.first_stage_cost[i] * std::ldexp(1.0, static_cast<int>(p));
    }
  }
  out.coupling_first = expand_columns(inst.coupling_first, ex.bits, width);
  out.first_stage_set.lhs = expand_columns(inst.first_stage_set.lhs, ex.bits, width);
  if (out.first_stage_uncertainty) {
    out.first_stage_uncertainty->cost_map =
        expand_columns(inst.first_stage_uncertainty->cost_map, ex.bits, width);
  }
  // Cap rows are only needed when the bits can exceed the bound.
  for (int i = 0; i < inst.n; ++i) {
    const int ub = inst.integer_upper[i];
    const int p = static_cast<int>(ex.bits[i].size());
    if (ub == (1 << p) - 1) continue;
    std::vector<double> row(width, 0.0);
    for (int k = 0; k < p; ++k) row[ex.bits[i][k]] = std::ldexp(1.0, k);
    out.first_stage_set.add_row(row, RowSense::kLessEqual, ub);
  }
  ex.instance = std::move(out);
  return ex;
}

KAdaptInstance lift_dependent_first_stage(const KAdaptInstance& inst) {
  if (!inst.dependent_first_stage()) {
    throw ModelError("instance has no scenario-dependent first-stage cost to lift");
  }
  if (inst.integer_first_stage()) {
    throw ModelError("expand integer first-stage variables before lifting");
  }
  const Matrix& c_map = inst.first_stage_uncertainty->cost_map;
  if (c_map.rows() != inst.q || c_map.cols() != inst.n) {
    throw ModelError("first-stage cost map must be q x n");
  }
  const int n = inst.n, m = inst.m, s = inst.s();
  const int lifted = n + m;

  KAdaptInstance out = inst;
  out.name = inst.name.empty() ? inst.name : inst.name + "-lifted";
  out.m = lifted;
  out.first_stage_uncertainty.reset();

  out.recourse_cost = Matrix(inst.q, lifted);
  for (int l = 0; l < inst.q; ++l) {
    for (int i = 0; i < n; ++i) out.recourse_cost(l, i) = c_map(l, i);
    for (int j = 0; j < m; ++j) out.recourse_cost(l, n + j) = inst.recourse_cost(l, j);
  }

  // x - x_copy <= 0 and -x + x_copy <= 0, followed by the original rows.
  out.coupling_first = Matrix(2 * n + s, n);
  out.coupling_recourse = Matrix(2 * n + s, lifted);
  out.coupling_rhs.assign(2 * n + s, 0.0);
  for (int i = 0; i < n; ++i) {
    out.coupling_first(i, i) = 1.0;
    out.coupling_recourse(i, i) = -1.0;
    out.coupling_first(n + i, i) = -1.0;
    out.coupling_recourse(n + i, i) = 1.0;
  }
  for (int r = 0; r < s; ++r) {
    for (int i = 0; i < n; ++i) out.coupling_first(2 * n + r, i) = inst.coupling_first(r, i);
    for (int j = 0; j < m; ++j) {
      out.coupling_recourse(2 * n + r, n + j) = inst.coupling_recourse(r, j);
    }
    out.coupling_rhs[2 * n + r] = inst.coupling_rhs[r];
  }
  if (inst.variant == Variant::kConstraint) {
    for (int l = 0; l < inst.q; ++l) {
      Matrix w(2 * n + s, lifted);
      for (int r = 0; r < s; ++r) {
        for (int j = 0; j < m; ++j) w(2 * n + r, n + j) = inst.coupling_uncertain[l](r, j);
      }
      out.coupling_uncertain[l] = std::move(w);
    }
  }

  out.recourse_set = Polytope::empty(lifted);
  for (int r = 0; r < inst.recourse_set.num_rows(); ++r) {
    std::vector<double> row(lifted, 0.0);
    for (int j = 0; j < m; ++j) row[n + j] = inst.recourse_set.lhs(r, j);
    out.recourse_set.add_row(row, inst.recourse_set.sense[r], inst.recourse_set.rhs[r]);
  }
  validate(out);
  return out;
}

}  // namespace kadapt
