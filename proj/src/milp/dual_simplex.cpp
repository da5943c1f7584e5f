#include "dual_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace kadapt::milp::internal {
namespace {

constexpr double kPrimalTol = kFeasibilityTol;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kSingularTol = 1e-11;
constexpr int kRefactorInterval = 100;
constexpr int kStallLimit = 40;

}  // namespace

Deadline::Deadline(double seconds)
    : start_(std::chrono::steady_clock::now()), seconds_(seconds) {}

double Deadline::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start_)
      .count();
}

bool Deadline::expired() const {
  return std::isfinite(seconds_) && elapsed() > seconds_;
}

StandardForm to_standard_form(const MilpModel& model) {
  StandardForm sf;
  sf.rows = model.num_rows();
  sf.cols = model.num_vars();
  sf.cost_sign =
      model.sense() == ObjectiveSense::kMinimize ? 1.0 : -1.0;

  std::vector<std::tuple<int, int, double>> trip;  // col, row, value
  for (int i = 0; i < sf.rows; ++i) {
    for (const Term& t : model.rows()[i].terms) {
      if (t.coef != 0.0) trip.emplace_back(t.var, i, t.coef);
    }
  }
  std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b));
  });
  sf.col_start.assign(sf.cols + 1, 0);
  for (std::size_t k = 0; k < trip.size();) {
    auto [c, r, v] = trip[k];
    std::size_t e = k + 1;
    while (e < trip.size() && std::get<0>(trip[e]) == c &&
           std::get<1>(trip[e]) == r) {
      v += std::get<2>(trip[e]);
      ++e;
    }
    if (v != 0.0) {
      sf.row_index.push_back(r);
      sf.value.push_back(v);
      ++sf.col_start[c + 1];
    }
    k = e;
  }
  std::partial_sum(sf.col_start.begin(), sf.col_start.end(),
                   sf.col_start.begin());

  sf.lo.resize(sf.cols + sf.rows);
  sf.hi.resize(sf.cols + sf.rows);
  for (int j = 0; j < sf.cols; ++j) {
    sf.lo[j] = model.variable(j).lo;
    sf.hi[j] = model.variable(j).hi;
  }
  sf.cost.assign(sf.cols, 0.0);
  for (const Term& t : model.objective()) sf.cost[t.var] += sf.cost_sign * t.coef;

  // Slack boxes: implied by the column bounds, widened so that they are never
  // active at a primal feasible point.
  std::vector<double> min_act(sf.rows, 0.0), max_act(sf.rows, 0.0);
  for (int j = 0; j < sf.cols; ++j) {
    for (int k = sf.col_start[j]; k < sf.col_start[j + 1]; ++k) {
      const double a = sf.value[k];
      const int r = sf.row_index[k];
      min_act[r] += std::min(a * sf.lo[j], a * sf.hi[j]);
      max_act[r] += std::max(a * sf.lo[j], a * sf.hi[j]);
    }
  }
  sf.rhs.resize(sf.rows);
  for (int i = 0; i < sf.rows; ++i) {
    const Row& row = model.rows()[i];
    sf.rhs[i] = row.rhs;
    const int s = sf.cols + i;
    switch (row.sense) {
      case RowSense::kLessEqual: {
        const double span = std::max(row.rhs - min_act[i], 0.0);
        sf.lo[s] = 0.0;
        sf.hi[s] = span + 1.0 + 1e-6 * span;
        break;
      }
      case RowSense::kGreaterEqual: {
        const double span = std::max(max_act[i] - row.rhs, 0.0);
        sf.lo[s] = -(span + 1.0 + 1e-6 * span);
        sf.hi[s] = 0.0;
        break;
      }
      case RowSense::kEqual:
        sf.lo[s] = 0.0;
        sf.hi[s] = 0.0;
        break;
    }
  }
  return sf;
}

DualSimplex::DualSimplex(const StandardForm& lp)
    : lp_(lp), lo_(lp.lo), hi_(lp.hi) {
  reset_to_slack_basis();
}

void DualSimplex::reset_to_slack_basis() {
  const int m = lp_.rows;
  head_.resize(m);
  pos_.assign(total(), -1);
  at_upper_.assign(total(), 0);
  for (int i = 0; i < m; ++i) {
    head_[i] = lp_.cols + i;
    pos_[lp_.cols + i] = i;
  }
  for (int j = 0; j < lp_.cols; ++j) at_upper_[j] = lp_.cost[j] < 0.0;
  binv_.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) binv_[static_cast<std::size_t>(i) * m + i] = 1.0;
  updates_since_refactor_ = 0;
}

Basis DualSimplex::basis() const { return Basis{head_, at_upper_}; }

void DualSimplex::load_basis(const Basis& basis) {
  if (static_cast<int>(basis.head.size()) != lp_.rows ||
      static_cast<int>(basis.at_upper.size()) != total()) {
    throw std::logic_error("basis size mismatch");
  }
  head_ = basis.head;
  at_upper_ = basis.at_upper;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int r = 0; r < lp_.rows; ++r) pos_[head_[r]] = r;
  refactor();
}

double DualSimplex::column_dot(const double* vec, int j) const {
  if (j >= lp_.cols) return vec[j - lp_.cols];
  double s = 0.0;
  for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
    s += vec[lp_.row_index[k]] * lp_.value[k];
  }
  return s;
}

void DualSimplex::ftran(int j, std::vector<double>& out) const {
  const int m = lp_.rows;
  out.assign(m, 0.0);
  const auto add_column = [&](int row, double a) {
    for (int i = 0; i < m; ++i) {
      out[i] += binv_[static_cast<std::size_t>(i) * m + row] * a;
    }
  };
  if (j >= lp_.cols) {
    add_column(j - lp_.cols, 1.0);
    return;
  }
  for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
    add_column(lp_.row_index[k], lp_.value[k]);
  }
}

void DualSimplex::refactor() {
  const int m = lp_.rows;
  updates_since_refactor_ = 0;
  if (m == 0) return;
  // Gauss-Jordan on [B | I] with partial pivoting.
  std::vector<double> b(static_cast<std::size_t>(m) * m, 0.0);
  for (int r = 0; r < m; ++r) {
    const int j = head_[r];
    if (j >= lp_.cols) {
      b[static_cast<std::size_t>(j - lp_.cols) * m + r] = 1.0;
    } else {
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        b[static_cast<std::size_t>(lp_.row_index[k]) * m + r] = lp_.value[k];
      }
    }
  }
  std::vector<double> inv(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) inv[static_cast<std::size_t>(i) * m + i] = 1.0;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    double best = std::abs(b[static_cast<std::size_t>(col) * m + col]);
    for (int i = col + 1; i < m; ++i) {
      const double v = std::abs(b[static_cast<std::size_t>(i) * m + col]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < kSingularTol) {
      reset_to_slack_basis();
      return;
    }
    if (piv != col) {
      std::swap_ranges(b.begin() + static_cast<std::size_t>(piv) * m,
                       b.begin() + static_cast<std::size_t>(piv + 1) * m,
                       b.begin() + static_cast<std::size_t>(col) * m);
      std::swap_ranges(inv.begin() + static_cast<std::size_t>(piv) * m,
                       inv.begin() + static_cast<std::size_t>(piv + 1) * m,
                       inv.begin() + static_cast<std::size_t>(col) * m);
    }
    double* brow = &b[static_cast<std::size_t>(col) * m];
    double* irow = &inv[static_cast<std::size_t>(col) * m];
    const double p = brow[col];
    for (int k = 0; k < m; ++k) {
      brow[k] /= p;
      irow[k] /= p;
    }
    for (int i = 0; i < m; ++i) {
      if (i == col) continue;
      const double f = b[static_cast<std::size_t>(i) * m + col];
      if (f == 0.0) continue;
      double* bi = &b[static_cast<std::size_t>(i) * m];
      double* ii = &inv[static_cast<std::size_t>(i) * m];
      for (int k = 0; k < m; ++k) {
        bi[k] -= f * brow[k];
        ii[k] -= f * irow[k];
      }
    }
  }
  // Rows of B^{-1} are indexed by basis position, columns by constraint row:
  // the elimination above produced exactly that ordering.
  binv_ = std::move(inv);
}

void DualSimplex::compute_duals() {
  const int m = lp_.rows;
  y_.assign(m, 0.0);
  for (int r = 0; r < m; ++r) {
    const int j = head_[r];
    const double cb = j < lp_.cols ? lp_.cost[j] : 0.0;
    if (cb == 0.0) continue;
    const double* row = &binv_[static_cast<std::size_t>(r) * m];
    for (int i = 0; i < m; ++i) y_[i] += cb * row[i];
  }
  d_.assign(total(), 0.0);
  for (int j = 0; j < total(); ++j) {
    if (pos_[j] >= 0) continue;
    const double c = j < lp_.cols ? lp_.cost[j] : 0.0;
    d_[j] = c - column_dot(y_.data(), j);
  }
}

void DualSimplex::fix_dual_feasibility() {
  for (int j = 0; j < total(); ++j) {
    if (pos_[j] >= 0 || lo_[j] == hi_[j]) continue;
    if (d_[j] < -kDualTol && !at_upper_[j]) at_upper_[j] = 1;
    if (d_[j] > kDualTol && at_upper_[j]) at_upper_[j] = 0;
  }
}

void DualSimplex::compute_primal() {
  const int m = lp_.rows;
  x_.assign(total(), 0.0);
  work_.assign(lp_.rhs.begin(), lp_.rhs.end());
  for (int j = 0; j < total(); ++j) {
    if (pos_[j] >= 0) continue;
    const double v = at_upper_[j] ? hi_[j] : lo_[j];
    x_[j] = v;
    if (v == 0.0) continue;
    if (j >= lp_.cols) {
      work_[j - lp_.cols] -= v;
    } else {
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        work_[lp_.row_index[k]] -= lp_.value[k] * v;
      }
    }
  }
  for (int r = 0; r < m; ++r) {
    const double* row = &binv_[static_cast<std::size_t>(r) * m];
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += row[i] * work_[i];
    x_[head_[r]] = s;
  }
  objective_ = 0.0;
  for (int j = 0; j < lp_.cols; ++j) objective_ += lp_.cost[j] * x_[j];
}

LpOutcome DualSimplex::solve(double cutoff, const Deadline& deadline) {
  const int m = lp_.rows;
  const std::int64_t max_iter = 200000 + 50LL * (m + lp_.cols);
  std::vector<double> rho(m), alpha(total()), col;
  bool bland = false;
  int stall = 0;
  double last_obj = -kInfinity;

  for (std::int64_t it = 0;; ++it) {
    if (updates_since_refactor_ >= kRefactorInterval) refactor();
    compute_duals();
    fix_dual_feasibility();
    compute_primal();

    if (objective_ > cutoff) return LpOutcome::kCutoff;
    if ((it & 63) == 63 && deadline.expired()) return LpOutcome::kTimeLimit;
    if (it > max_iter) throw std::runtime_error("dual simplex iteration limit");

    if (objective_ <= last_obj + 1e-12 * (1.0 + std::abs(objective_))) {
      if (++stall > kStallLimit) bland = true;
    } else {
      stall = 0;
    }
    last_obj = std::max(last_obj, objective_);

    // Leaving row: dual steepest edge (exact weights from the explicit
    // inverse), or smallest basic index under Bland's rule.
    int r = -1;
    double best = 0.0;
    for (int p = 0; p < m; ++p) {
      const int j = head_[p];
      const double infeas =
          std::max(lo_[j] - x_[j], x_[j] - hi_[j]);
      if (infeas <= kPrimalTol) continue;
      if (bland) {
        if (r < 0 || j < head_[r]) r = p;
        continue;
      }
      const double* row = &binv_[static_cast<std::size_t>(p) * m];
      double w = 0.0;
      for (int i = 0; i < m; ++i) w += row[i] * row[i];
      const double score = infeas * infeas / std::max(w, 1e-12);
      if (score > best) {
        best = score;
        r = p;
      }
    }
    if (r < 0) return LpOutcome::kOptimal;

    const int leaving = head_[r];
    const bool below = x_[leaving] < lo_[leaving];
    const double dir = below ? 1.0 : -1.0;
    std::copy_n(&binv_[static_cast<std::size_t>(r) * m], m, rho.begin());

    // Dual ratio test (Harris two-pass, or plain min-ratio under Bland).
    double t_max = kInfinity;
    int enter = -1;
    for (int j = 0; j < total(); ++j) {
      if (pos_[j] >= 0 || lo_[j] == hi_[j]) {
        alpha[j] = 0.0;
        continue;
      }
      alpha[j] = column_dot(rho.data(), j);
      const double a = dir * alpha[j];
      const bool ok = at_upper_[j] ? a > kPivotTol : a < -kPivotTol;
      if (!ok) continue;
      const double abs_a = std::abs(alpha[j]);
      if (bland) {
        const double ratio = std::abs(d_[j]) / abs_a;
        if (enter < 0 || ratio < t_max - 1e-12) {
          t_max = ratio;
          enter = j;
        }
      } else {
        t_max = std::min(t_max, (std::abs(d_[j]) + kDualTol) / abs_a);
      }
    }
    if (!bland) {
      double best_alpha = 0.0;
      for (int j = 0; j < total(); ++j) {
        if (pos_[j] >= 0 || lo_[j] == hi_[j]) continue;
        const double a = dir * alpha[j];
        const bool ok = at_upper_[j] ? a > kPivotTol : a < -kPivotTol;
        if (!ok) continue;
        const double abs_a = std::abs(alpha[j]);
        if (std::abs(d_[j]) / abs_a <= t_max && abs_a > best_alpha) {
          best_alpha = abs_a;
          enter = j;
        }
      }
    }
    if (enter < 0) return LpOutcome::kInfeasible;

    ftran(enter, col);
    const double piv = col[r];
    if (std::abs(piv) < kSingularTol) {
      refactor();
      continue;
    }
    // Eta update of the explicit inverse.
    double* prow = &binv_[static_cast<std::size_t>(r) * m];
    for (int i = 0; i < m; ++i) prow[i] /= piv;
    for (int p = 0; p < m; ++p) {
      if (p == r || col[p] == 0.0) continue;
      const double f = col[p];
      double* row = &binv_[static_cast<std::size_t>(p) * m];
      for (int i = 0; i < m; ++i) row[i] -= f * prow[i];
    }
    head_[r] = enter;
    pos_[enter] = r;
    pos_[leaving] = -1;
    at_upper_[leaving] = below ? 0 : 1;
    ++updates_since_refactor_;
    ++iterations_;
  }
}

}  // namespace kadapt::milp::internal
