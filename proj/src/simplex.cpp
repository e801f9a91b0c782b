#include "ropo/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace ropo {
namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kCheckTolerance = 1e-7;
constexpr double kHarrisRelaxation = 1e-11;
constexpr double kRayTolerance = 1e-7;

enum class Kind { kStructural, kSlack, kArtificial };

/// Standard-form data: every row reads  sum_j a_j x_j (+ slack) (+ artificial) = rhs,
/// with rhs >= 0 and all columns non-negative.
struct StandardForm {
  std::size_t rows = 0;
  std::size_t structural = 0;         // split columns for free variables included
  std::vector<double> a;              // rows x structural
  std::vector<double> rhs;
  std::vector<double> slack_sign;     // +1 slack, -1 surplus, 0 none
  std::vector<bool> artificial;       // row carries an artificial
  std::vector<std::size_t> plus_col;  // original variable -> column
  std::vector<std::size_t> minus_col;
  std::vector<double> cost;           // per structural column

  // Labels: [0, structural) structural, then one slack per row, then one
  // artificial per row. Unused labels never appear.
  std::size_t slack_label(std::size_t row) const { return structural + row; }
  std::size_t artificial_label(std::size_t row) const { return structural + rows + row; }
  Kind kind(std::size_t label) const {
    if (label < structural) return Kind::kStructural;
    if (label < structural + rows) return Kind::kSlack;
    return Kind::kArtificial;
  }
  /// Entry of the original column for a label in a row.
  double column(std::size_t label, std::size_t row) const {
    switch (kind(label)) {
      case Kind::kStructural:
        return a[row * structural + label];
      case Kind::kSlack:
        return label - structural == row ? slack_sign[row] : 0.0;
      case Kind::kArtificial:
        return label - structural - rows == row ? 1.0 : 0.0;
    }
    return 0.0;
  }
};

StandardForm standardize(const LinearProgram& lp) {
  StandardForm f;
  const std::size_t n = lp.objective.size();
  f.rows = lp.constraints.size();
  f.plus_col.resize(n);
  f.minus_col.assign(n, SIZE_MAX);
  for (std::size_t j = 0; j < n; ++j) {
    f.plus_col[j] = f.structural++;
    if (!lp.free.empty() && lp.free[j]) f.minus_col[j] = f.structural++;
  }
  f.cost.assign(f.structural, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    f.cost[f.plus_col[j]] = lp.objective[j];
    if (f.minus_col[j] != SIZE_MAX) f.cost[f.minus_col[j]] = -lp.objective[j];
  }
  f.a.assign(f.rows * f.structural, 0.0);
  f.rhs.resize(f.rows);
  f.slack_sign.assign(f.rows, 0.0);
  f.artificial.assign(f.rows, false);
  for (std::size_t i = 0; i < f.rows; ++i) {
    const Constraint& c = lp.constraints[i];
    Relation rel = c.relation;
    double sign = 1.0;
    // Rows with a zero right-hand side are written as <= so the slack can
    // start in the basis.
    if (c.rhs < 0.0 || (c.rhs == 0.0 && rel == Relation::kGreaterEqual)) {
      sign = -1.0;
      if (rel == Relation::kLessEqual) rel = Relation::kGreaterEqual;
      else if (rel == Relation::kGreaterEqual) rel = Relation::kLessEqual;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = sign * c.coefficients[j];
      f.a[i * f.structural + f.plus_col[j]] = v;
      if (f.minus_col[j] != SIZE_MAX) f.a[i * f.structural + f.minus_col[j]] = -v;
    }
    f.rhs[i] = sign * c.rhs;
    if (rel == Relation::kLessEqual) f.slack_sign[i] = 1.0;
    if (rel == Relation::kGreaterEqual) f.slack_sign[i] = -1.0;
    f.artificial[i] = rel != Relation::kLessEqual;
  }
  return f;
}

/**
 * Tableau restricted to the non-basic columns: row i reads
 *   x_basic[i] + sum_j entry(i, j) x_nonbasic[j] = rhs(i),
 * and the objective row holds reduced costs (a column may enter when its
 * reduced cost is negative) with the objective value in its last cell.
 */
class Dictionary {
 public:
  Dictionary(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_((rows + 1) * (cols + 1), 0.0), basic_(rows), nonbasic_(cols) {}

  double& at(std::size_t r, std::size_t c) { return cells_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& cost(std::size_t c) { return at(rows_, c); }
  double& value() { return at(rows_, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basic() { return basic_; }
  std::vector<std::size_t>& nonbasic() { return nonbasic_; }

  void pivot(std::size_t r, std::size_t c) {
    const std::size_t width = cols_ + 1;
    double* prow = &cells_[r * width];
    const double inv = 1.0 / prow[c];
    for (std::size_t j = 0; j < width; ++j) prow[j] *= inv;
    prow[c] = inv;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      double* row = &cells_[i * width];
      const double factor = row[c];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) row[j] -= factor * prow[j];
      row[c] = -factor * inv;
    }
    std::swap(basic_[r], nonbasic_[c]);
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> cells_;
  std::vector<std::size_t> basic_;
  std::vector<std::size_t> nonbasic_;
};

enum class PhaseResult { kOptimal, kUnbounded, kStalled };

struct PivotBudget {
  std::size_t used = 0;
  std::size_t bland_after = 0;
  std::size_t cap = 0;
  bool bland = false;
};

PhaseResult run_phase(Dictionary& t, const StandardForm& f, PivotBudget& budget, bool phase_one) {
  std::vector<bool> skip(t.cols(), false);
  while (true) {
    // Phase one is bounded by zero; once there, remaining gains are round-off.
    if (phase_one && t.value() >= -kPivotTolerance * 1e-3) return PhaseResult::kOptimal;
    std::size_t entering = t.cols();
    double most_negative = -kPivotTolerance;
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (skip[j] || f.kind(t.nonbasic()[j]) == Kind::kArtificial) continue;
      const double d = t.cost(j);
      if (budget.bland) {
        if (d < -kPivotTolerance &&
            (entering == t.cols() || t.nonbasic()[j] < t.nonbasic()[entering])) {
          entering = j;
        }
      } else if (d < most_negative) {
        most_negative = d;
        entering = j;
      }
    }
    if (entering == t.cols()) return PhaseResult::kOptimal;

    // Harris ratio test: bound the step with slightly relaxed rows, then take
    // the largest pivot among rows within that bound.
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, entering);
      if (a <= kPivotTolerance) continue;
      bound = std::min(bound, (std::max(t.rhs(i), 0.0) + kHarrisRelaxation) / a);
    }
    std::size_t leaving = t.rows();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, entering);
      if (a <= kPivotTolerance || std::max(t.rhs(i), 0.0) / a > bound) continue;
      if (leaving == t.rows()) {
        leaving = i;
      } else if (budget.bland ? t.basic()[i] < t.basic()[leaving] : a > t.at(leaving, entering)) {
        leaving = i;
      }
    }
    if (leaving == t.rows()) {
      // A ray whose gain is round-off, or any ray in phase one, is not a real
      // improvement; stop considering that column.
      if (phase_one || t.cost(entering) > -kRayTolerance) {
        skip[entering] = true;
        continue;
      }
      return PhaseResult::kUnbounded;
    }

    t.pivot(leaving, entering);
    std::fill(skip.begin(), skip.end(), false);
    ++budget.used;
    if (budget.used >= budget.bland_after) budget.bland = true;
    if (budget.used >= budget.cap) return PhaseResult::kStalled;
  }
}

/// Recomputes the basic solution from the original rows by Gaussian
/// elimination, which removes the drift accumulated over many pivots.
std::vector<double> refined_basic_values(const StandardForm& f, const std::vector<std::size_t>& basis) {
  const std::size_t m = f.rows;
  const std::size_t w = m + 1;
  std::vector<double> a(m * w);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) a[i * w + k] = f.column(basis[k], i);
    a[i * w + m] = f.rhs[i];
  }
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < m; ++i) {
      if (std::abs(a[i * w + k]) > std::abs(a[p * w + k])) p = i;
    }
    if (std::abs(a[p * w + k]) < 1e-13) return {};
    if (p != k) {
      for (std::size_t j = 0; j < w; ++j) std::swap(a[p * w + j], a[k * w + j]);
    }
    for (std::size_t i = k + 1; i < m; ++i) {
      const double factor = a[i * w + k] / a[k * w + k];
      if (factor == 0.0) continue;
      for (std::size_t j = k; j < w; ++j) a[i * w + j] -= factor * a[k * w + j];
    }
  }
  std::vector<double> x(m);
  for (std::size_t k = m; k-- > 0;) {
    double v = a[k * w + m];
    for (std::size_t j = k + 1; j < m; ++j) v -= a[k * w + j] * x[j];
    x[k] = v / a[k * w + k];
  }
  return x;
}

struct Attempt {
  bool ok = false;
  LpSolution solution;
};

Attempt solve_once(const LinearProgram& lp, const StandardForm& f, bool bland_from_start) {
  const std::size_t m = f.rows;
  // Non-basic at the start: structural columns and surplus columns.
  std::vector<std::size_t> start_nonbasic;
  for (std::size_t j = 0; j < f.structural; ++j) start_nonbasic.push_back(j);
  for (std::size_t i = 0; i < m; ++i) {
    if (f.slack_sign[i] < 0.0) start_nonbasic.push_back(f.slack_label(i));
  }
  Dictionary t(m, start_nonbasic.size());
  t.nonbasic() = start_nonbasic;
  bool has_artificials = false;
  for (std::size_t i = 0; i < m; ++i) {
    t.basic()[i] = f.artificial[i] ? f.artificial_label(i) : f.slack_label(i);
    has_artificials = has_artificials || f.artificial[i];
    for (std::size_t j = 0; j < t.cols(); ++j) t.at(i, j) = f.column(t.nonbasic()[j], i);
    t.rhs(i) = f.rhs[i];
  }

  PivotBudget budget;
  budget.bland_after = 10 * (m + t.cols());
  budget.cap = budget.bland_after + 50 * (m + t.cols()) + 1000;
  budget.bland = bland_from_start;

  Attempt attempt;
  if (has_artificials) {
    // Phase one: maximise -sum(artificials).
    for (std::size_t j = 0; j <= t.cols(); ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (f.artificial[i]) d -= t.at(i, j);
      }
      t.at(m, j) = d;
    }
    if (run_phase(t, f, budget, true) != PhaseResult::kOptimal) return attempt;
    double scale = 1.0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(f.rhs[i]));
    if (t.value() < -kPivotTolerance * scale) {
      attempt.ok = true;
      attempt.solution.status = LpStatus::kInfeasible;
      return attempt;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (f.kind(t.basic()[i]) != Kind::kArtificial) continue;
      std::size_t col = t.cols();
      double largest = kPivotTolerance;
      for (std::size_t j = 0; j < t.cols(); ++j) {
        if (f.kind(t.nonbasic()[j]) == Kind::kArtificial) continue;
        if (std::abs(t.at(i, j)) > largest) {
          largest = std::abs(t.at(i, j));
          col = j;
        }
      }
      if (col != t.cols()) t.pivot(i, col);
    }
  }

  // Phase two objective row: reduced costs c_B B^-1 A_N - c_N.
  auto label_cost = [&](std::size_t label) {
    return f.kind(label) == Kind::kStructural ? f.cost[label] : 0.0;
  };
  for (std::size_t j = 0; j <= t.cols(); ++j) {
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) d += label_cost(t.basic()[i]) * t.at(i, j);
    t.at(m, j) = j < t.cols() ? d - label_cost(t.nonbasic()[j]) : d;
  }
  const PhaseResult r = run_phase(t, f, budget, false);
  if (r == PhaseResult::kStalled) return attempt;
  if (r == PhaseResult::kUnbounded) {
    attempt.ok = true;
    attempt.solution.status = LpStatus::kUnbounded;
    return attempt;
  }

  const std::size_t n = lp.objective.size();
  auto extract = [&](const std::vector<double>& basic_values) {
    std::vector<double> structural_value(f.structural, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t label = t.basic()[i];
      if (f.kind(label) == Kind::kStructural) structural_value[label] = std::max(basic_values[i], 0.0);
    }
    LpSolution sol;
    sol.status = LpStatus::kOptimal;
    sol.assignment.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double v = structural_value[f.plus_col[j]];
      if (f.minus_col[j] != SIZE_MAX) v -= structural_value[f.minus_col[j]];
      sol.assignment[j] = v;
      sol.optimum += lp.objective[j] * v;
    }
    return sol;
  };
  auto feasible = [&](const LpSolution& sol) {
    for (const Constraint& c : lp.constraints) {
      double activity = 0.0;
      for (std::size_t j = 0; j < n; ++j) activity += c.coefficients[j] * sol.assignment[j];
      const double slack = kCheckTolerance * (1.0 + std::abs(c.rhs));
      const bool ok = (c.relation == Relation::kLessEqual && activity <= c.rhs + slack) ||
                      (c.relation == Relation::kGreaterEqual && activity >= c.rhs - slack) ||
                      (c.relation == Relation::kEqual && std::abs(activity - c.rhs) <= slack);
      if (!ok) return false;
    }
    return true;
  };

  std::vector<double> basic_values(m);
  for (std::size_t i = 0; i < m; ++i) basic_values[i] = t.rhs(i);
  attempt.solution = extract(basic_values);
  if (!feasible(attempt.solution)) {
    // Pivot drift: recompute the same basis from the original rows.
    basic_values = refined_basic_values(f, t.basic());
    if (basic_values.empty()) return attempt;
    attempt.solution = extract(basic_values);
    if (!feasible(attempt.solution)) return attempt;
  }
  attempt.ok = true;
  return attempt;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  for (const Constraint& c : lp.constraints) {
    if (c.coefficients.size() != lp.objective.size()) {
      throw std::invalid_argument("constraint width differs from objective width");
    }
  }
  if (!lp.free.empty() && lp.free.size() != lp.objective.size()) {
    throw std::invalid_argument("free-variable mask has the wrong width");
  }
  const StandardForm f = standardize(lp);
  Attempt first = solve_once(lp, f, false);
  if (first.ok) return std::move(first.solution);
  Attempt second = solve_once(lp, f, true);
  if (second.ok) return std::move(second.solution);
  throw LpNumericalFailure("simplex could not certify a status");
}

}  // namespace ropo
