#pragma once

#include <stdexcept>
#include <vector>

namespace ropo {

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct Constraint {
  std::vector<double> coefficients;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

/// maximize objective . x subject to constraints; x_j >= 0 unless free[j].
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  /// Variables with no lower bound. Empty means every variable is >= 0.
  std::vector<bool> free;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double optimum = 0.0;
  std::vector<double> assignment;
};

class LpNumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Dense two-phase primal simplex on a dictionary (non-basic columns only).
 *
 * Dantzig pricing for the first 10*(m+n) pivots, Bland's rule afterwards.
 * An optimal answer that fails the 1e-7 post-check is recomputed with Bland's
 * rule from the start; if that also fails, LpNumericalFailure is thrown.
 */
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace ropo
