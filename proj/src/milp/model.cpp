#include <algorithm>
#include <cmath>
#include <string>

#include "kadapt/milp.hpp"

namespace kadapt::milp {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "Optimal";
    case SolveStatus::kInfeasible:
      return "Infeasible";
    case SolveStatus::kUnbounded:
      return "Unbounded";
    case SolveStatus::kTimeLimit:
      return "TimeLimit";
  }
  return "Unknown";
}

std::string_view to_string(RowSense sense) {
  switch (sense) {
    case RowSense::kLessEqual:
      return "<=";
    case RowSense::kEqual:
      return "=";
    case RowSense::kGreaterEqual:
      return ">=";
  }
  return "?";
}

int MilpModel::add_variable(double lo, double hi, VarKind kind,
                            std::string name) {
  vars_.push_back(Variable{lo, hi, kind, std::move(name)});
  return num_vars() - 1;
}

void MilpModel::set_bounds(int var, double lo, double hi) {
  Variable& v = vars_.at(var);
  v.lo = lo;
  v.hi = hi;
}

void MilpModel::add_row(std::vector<Term> terms, RowSense sense, double rhs,
                        std::string name) {
  rows_.push_back(Row{std::move(terms), sense, rhs, std::move(name)});
}

void MilpModel::set_objective(std::vector<Term> terms, double constant,
                              ObjectiveSense sense) {
  objective_ = std::move(terms);
  objective_constant_ = constant;
  sense_ = sense;
}

bool MilpModel::all_continuous() const {
  return std::all_of(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.kind == VarKind::kContinuous;
  });
}

int MilpModel::num_binaries() const {
  return static_cast<int>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
        return v.kind == VarKind::kBinary;
      }));
}

void MilpModel::validate() const {
  const auto check_terms = [&](const std::vector<Term>& terms,
                               const std::string& where) {
    for (const Term& t : terms) {
      if (t.var < 0 || t.var >= num_vars()) {
        throw ModelError(where + ": variable index " + std::to_string(t.var) +
                         " out of range");
      }
      if (!std::isfinite(t.coef)) {
        throw ModelError(where + ": non-finite coefficient");
      }
    }
  };
  for (int j = 0; j < num_vars(); ++j) {
    const Variable& v = vars_[j];
    if (!std::isfinite(v.lo) || !std::isfinite(v.hi)) {
      throw ModelError("variable " + std::to_string(j) +
                       " must have finite bounds");
    }
    if (v.lo > v.hi) {
      throw ModelError("variable " + std::to_string(j) + " has lo > hi");
    }
    if (v.kind == VarKind::kBinary && (v.lo < 0.0 || v.hi > 1.0)) {
      throw ModelError("binary variable " + std::to_string(j) +
                       " has bounds outside [0,1]");
    }
  }
  for (int i = 0; i < num_rows(); ++i) {
    check_terms(rows_[i].terms, "row " + std::to_string(i));
    if (!std::isfinite(rows_[i].rhs)) {
      throw ModelError("row " + std::to_string(i) + ": non-finite rhs");
    }
  }
  check_terms(objective_, "objective");
  if (!std::isfinite(objective_constant_)) {
    throw ModelError("objective: non-finite constant");
  }
}

double MilpModel::evaluate_objective(std::span<const double> values) const {
  double z = objective_constant_;
  for (const Term& t : objective_) z += t.coef * values[t.var];
  return z;
}

double MilpModel::max_violation(std::span<const double> values) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    const Variable& v = vars_[j];
    worst = std::max({worst, v.lo - values[j], values[j] - v.hi});
    if (v.kind == VarKind::kBinary) {
      worst = std::max(worst, std::abs(values[j] - std::round(values[j])));
    }
  }
  for (const Row& row : rows_) {
    double act = 0.0;
    for (const Term& t : row.terms) act += t.coef * values[t.var];
    switch (row.sense) {
      case RowSense::kLessEqual:
        worst = std::max(worst, act - row.rhs);
        break;
      case RowSense::kGreaterEqual:
        worst = std::max(worst, row.rhs - act);
        break;
      case RowSense::kEqual:
        worst = std::max(worst, std::abs(act - row.rhs));
        break;
    }
  }
  return worst;
}

}  // namespace kadapt::milp
