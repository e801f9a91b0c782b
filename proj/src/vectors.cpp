#include "ropo/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ropo/simplex.hpp"

namespace ropo {

Region::Region(std::vector<StateIndex> states) : states_(std::move(states)) {
  std::sort(states_.begin(), states_.end());
  states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
  if (states_.empty()) throw std::invalid_argument("a region must contain at least one state");
}

Region Region::all(std::size_t num_states) {
  std::vector<StateIndex> states(num_states);
  std::iota(states.begin(), states.end(), StateIndex{0});
  return Region(std::move(states));
}

bool Region::contains(StateIndex s) const {
  return std::binary_search(states_.begin(), states_.end(), s);
}

bool Region::is_subset_of(const Region& other) const {
  return std::includes(other.states_.begin(), other.states_.end(), states_.begin(),
                       states_.end());
}

double dot(std::span<const double> values, const Belief& b) {
  double total = 0.0;
  for (std::size_t s = 0; s < values.size(); ++s) total += values[s] * b[s];
  return total;
}

double induced_value(const VectorSet& set, const Belief& b) {
  if (set.empty()) return 0.0;
  double best_value = dot(set.front().values, b);
  for (std::size_t i = 1; i < set.size(); ++i) best_value = std::max(best_value, dot(set[i].values, b));
  return best_value;
}

VectorSet cross_sum(const VectorSet& w, const VectorSet& x) {
  VectorSet out;
  out.reserve(w.size() * x.size());
  for (const ValueVector& alpha : w) {
    for (const ValueVector& beta : x) {
      ValueVector sum{alpha.values, alpha.action};
      for (std::size_t s = 0; s < sum.values.size(); ++s) sum.values[s] += beta.values[s];
      out.push_back(std::move(sum));
    }
  }
  return out;
}

namespace {

using Row = std::span<const double>;

/// Vectors of a set restricted to a region, in region-local coordinates.
class LocalSet {
 public:
  LocalSet(const VectorSet& w, const Region& r) : dim_(r.size()) {
    const bool full = !w.empty() && r.size() == w.front().values.size();
    if (full) {
      for (const ValueVector& v : w) rows_.emplace_back(v.values);
      return;
    }
    storage_.resize(w.size() * dim_);
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t k = 0; k < dim_; ++k) storage_[i * dim_ + k] = w[i].values[r[k]];
    }
    for (std::size_t i = 0; i < w.size(); ++i) rows_.emplace_back(&storage_[i * dim_], dim_);
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  Row operator[](std::size_t i) const { return rows_[i]; }

 private:
  std::size_t dim_;
  std::vector<double> storage_;
  std::vector<Row> rows_;
};

struct LocalWitness {
  double advantage;
  std::vector<double> belief;
};

double local_dot(Row v, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) total += v[k] * b[k];
  return total;
}

// min over members of (alpha - beta) . b
double advantage_at(Row alpha, const LocalSet& set, std::span<const std::size_t> members,
                    std::span<const double> b) {
  const double own = local_dot(alpha, b);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i : members) worst = std::min(worst, own - local_dot(set[i], b));
  return worst;
}

LocalWitness general_advantage(Row alpha, const LocalSet& set,
                               std::span<const std::size_t> members) {
  const std::size_t dim = alpha.size();
  // Variables: b(0..dim-1) >= 0, x free.
  LinearProgram lp;
  lp.objective.assign(dim + 1, 0.0);
  lp.objective[dim] = 1.0;
  lp.free.assign(dim + 1, false);
  lp.free[dim] = true;
  lp.constraints.reserve(members.size() + 1);
  for (std::size_t i : members) {
    Row beta = set[i];
    Constraint c;
    c.coefficients.resize(dim + 1);
    for (std::size_t k = 0; k < dim; ++k) c.coefficients[k] = alpha[k] - beta[k];
    c.coefficients[dim] = -1.0;
    c.relation = Relation::kGreaterEqual;
    c.rhs = 0.0;
    lp.constraints.push_back(std::move(c));
  }
  Constraint simplex_row;
  simplex_row.coefficients.assign(dim + 1, 1.0);
  simplex_row.coefficients[dim] = 0.0;
  simplex_row.relation = Relation::kEqual;
  simplex_row.rhs = 1.0;
  lp.constraints.push_back(std::move(simplex_row));

  LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw LpNumericalFailure("domination LP did not reach an optimum");
  }
  std::vector<double> b(sol.assignment.begin(), sol.assignment.begin() + static_cast<std::ptrdiff_t>(dim));
  double total = 0.0;
  for (double& p : b) {
    p = std::max(p, 0.0);
    total += p;
  }
  for (double& p : b) p /= total;
  return {sol.optimum, std::move(b)};
}

/**
 * Simplex specialised to max_b min_i (alpha - beta_i) . b over the simplex.
 *
 * With y = b(0..d-2) and b(d-1) = 1 - sum y, each member gives a row
 * x <= g_i + h_i . y. Starting at y = 0 with x pinned to the tightest row the
 * dictionary is already feasible, so there is no first phase. Returns false
 * when it gives up (pivot budget or a missing ratio-test row).
 */
bool fast_advantage(Row alpha, const LocalSet& set, std::span<const std::size_t> members,
                    std::vector<double>& belief) {
  constexpr double kPivotTol = 1e-11;
  constexpr double kCostTol = 1e-12;
  const std::size_t d = alpha.size();
  const std::size_t m = members.size();
  const std::size_t cols = d;  // y(0..d-2) and the pinned row's slack
  const std::size_t rows = m + 1;  // member rows (the pinned one holds x) and sum y <= 1

  thread_local std::vector<double> a;  // rows x cols
  thread_local std::vector<double> rhs;
  thread_local std::vector<double> cost;
  thread_local std::vector<std::size_t> basic;     // label per row
  thread_local std::vector<std::size_t> nonbasic;  // label per column
  a.assign(rows * cols, 0.0);
  rhs.assign(rows, 0.0);
  cost.assign(cols, 0.0);
  basic.resize(rows);
  nonbasic.resize(cols);

  // Labels: 0..d-2 are y, d-1+i is the slack of member row i, d-1+m the sum row slack.
  std::size_t pinned = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double g = alpha[d - 1] - set[members[i]][d - 1];
    if (g < lowest) {
      lowest = g;
      pinned = i;
    }
  }
  auto h = [&](std::size_t i, std::size_t k) {
    Row beta = set[members[i]];
    return (alpha[k] - beta[k]) - (alpha[d - 1] - beta[d - 1]);
  };
  // Row i (i != pinned): slack_i = (g_i - g_p) + sum_k (h_ik - h_pk) y_k + slack_p.
  for (std::size_t i = 0; i < m; ++i) {
    if (i == pinned) continue;
    Row beta = set[members[i]];
    rhs[i] = (alpha[d - 1] - beta[d - 1]) - lowest;
    for (std::size_t k = 0; k + 1 < d; ++k) a[i * cols + k] = h(i, k) - h(pinned, k);
    a[i * cols + d - 1] = 1.0;
    basic[i] = d - 1 + i;
  }
  // Row pinned holds x = g_p + sum_k h_pk y_k - slack_p; it is never a leaving row.
  rhs[pinned] = lowest;
  for (std::size_t k = 0; k + 1 < d; ++k) a[pinned * cols + k] = h(pinned, k);
  a[pinned * cols + d - 1] = -1.0;
  basic[pinned] = std::numeric_limits<std::size_t>::max();
  // Sum row: slack = 1 - sum y.
  rhs[m] = 1.0;
  for (std::size_t k = 0; k + 1 < d; ++k) a[m * cols + k] = -1.0;
  basic[m] = d - 1 + m;
  for (std::size_t k = 0; k + 1 < d; ++k) nonbasic[k] = k;
  nonbasic[d - 1] = d - 1 + pinned;
  for (std::size_t c = 0; c < cols; ++c) cost[c] = a[pinned * cols + c];

  const std::size_t dantzig_budget = 10 * (rows + cols);
  const std::size_t total_budget = 50 * (rows + cols) + 1000;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > total_budget) return false;
    const bool bland = iter >= dantzig_budget;
    std::size_t enter = cols;
    for (std::size_t c = 0; c < cols; ++c) {
      if (cost[c] <= kCostTol) continue;
      if (enter == cols || (bland ? nonbasic[c] < nonbasic[enter] : cost[c] > cost[enter])) enter = c;
    }
    if (enter == cols) break;
    std::size_t leave = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pinned) continue;
      const double coef = a[i * cols + enter];
      if (coef >= -kPivotTol) continue;
      const double ratio = std::max(rhs[i], 0.0) / -coef;
      if (ratio < best_ratio ||
          (ratio == best_ratio && bland && basic[i] < basic[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == rows) return false;
    // Solve the leaving row for the entering variable and substitute.
    double* prow = &a[leave * cols];
    const double p = prow[enter];
    const double prhs = -rhs[leave] / p;
    for (std::size_t c = 0; c < cols; ++c) prow[c] = -prow[c] / p;
    prow[enter] = 1.0 / p;
    rhs[leave] = prhs;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leave) continue;
      double* row = &a[i * cols];
      const double f = row[enter];
      if (f == 0.0) continue;
      row[enter] = 0.0;
      for (std::size_t c = 0; c < cols; ++c) row[c] += f * prow[c];
      rhs[i] += f * prhs;
    }
    const double f = cost[enter];
    cost[enter] = 0.0;
    for (std::size_t c = 0; c < cols; ++c) cost[c] += f * prow[c];
    std::swap(basic[leave], nonbasic[enter]);
  }

  belief.assign(d, 0.0);
  double used = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (i != pinned && basic[i] < d - 1) {
      const double y = std::max(rhs[i], 0.0);
      belief[basic[i]] = y;
      used += y;
    }
  }
  if (used > 1.0) {
    for (std::size_t k = 0; k + 1 < d; ++k) belief[k] /= used;
    used = 1.0;
  }
  belief[d - 1] = 1.0 - used;
  return true;
}

LocalWitness local_advantage(Row alpha, const LocalSet& set, std::span<const std::size_t> members) {
  const std::size_t dim = alpha.size();
  if (dim == 1) {
    double top = set[members.front()][0];
    for (std::size_t i : members) top = std::max(top, set[i][0]);
    return {alpha[0] - top, {1.0}};
  }
  std::vector<double> b;
  if (fast_advantage(alpha, set, members, b)) {
    return {advantage_at(alpha, set, members, b), std::move(b)};
  }
  LocalWitness w = general_advantage(alpha, set, members);
  w.advantage = advantage_at(alpha, set, members, w.belief);
  return w;
}

bool lexicographically_greater(Row a, Row b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return a[k] > b[k];
  }
  return false;
}

bool tied(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

std::size_t local_best(std::span<const double> b, const LocalSet& set,
                       std::span<const std::size_t> members) {
  std::size_t winner = members.front();
  double winner_value = local_dot(set[winner], b);
  for (std::size_t k = 1; k < members.size(); ++k) {
    const std::size_t i = members[k];
    const double v = local_dot(set[i], b);
    if (tied(v, winner_value)) {
      if (lexicographically_greater(set[i], set[winner])) {
        winner = i;
        winner_value = std::max(v, winner_value);
      }
    } else if (v > winner_value) {
      winner = i;
      winner_value = v;
    }
  }
  return winner;
}

bool pointwise_geq(Row a, Row b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return false;
  }
  return true;
}

std::vector<std::size_t> local_pointwise_purge(const LocalSet& set) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool dominated = false;
    for (std::size_t j : kept) {
      if (pointwise_geq(set[j], set[i])) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    std::erase_if(kept, [&](std::size_t j) { return pointwise_geq(set[i], set[j]); });
    kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::size_t> local_purge(const LocalSet& set, double tolerance) {
  std::vector<std::size_t> pending = local_pointwise_purge(set);
  std::vector<std::size_t> kept;
  if (pending.size() <= 1) return pending;
  const std::size_t dim = set.dim();
  const std::vector<double> uniform(dim, 1.0 / static_cast<double>(dim));
  while (!pending.empty()) {
    const std::size_t candidate = pending.front();
    std::vector<double> witness;
    if (kept.empty()) {
      witness = uniform;
    } else {
      LocalWitness w = local_advantage(set[candidate], set, kept);
      if (!(w.advantage > tolerance + kDominanceTolerance)) {
        pending.erase(pending.begin());
        continue;
      }
      witness = std::move(w.belief);
    }
    const std::size_t winner = local_best(witness, set, pending);
    kept.push_back(winner);
    pending.erase(std::find(pending.begin(), pending.end(), winner));
  }
  return kept;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

Belief expand(std::span<const double> local, const Region& r, std::size_t num_states) {
  std::vector<double> probs(num_states, 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) probs[r[k]] = local[k];
  return Belief(std::move(probs));
}

}  // namespace

Witness max_advantage(const ValueVector& alpha, const VectorSet& w, const Region& r) {
  if (w.empty()) throw std::invalid_argument("max_advantage needs a non-empty comparison set");
  const LocalSet set(w, r);
  VectorSet single{alpha};
  const LocalSet alpha_local(single, r);
  const std::vector<std::size_t> members = all_indices(w.size());
  LocalWitness lw = local_advantage(alpha_local[0], set, members);
  return {lw.advantage, expand(lw.belief, r, alpha.values.size())};
}

std::optional<Belief> dominate(const ValueVector& alpha, const VectorSet& w, const Region& r,
                               double eps) {
  if (w.empty()) {
    std::vector<double> uniform(r.size(), 1.0 / static_cast<double>(r.size()));
    return expand(uniform, r, alpha.values.size());
  }
  Witness witness = max_advantage(alpha, w, r);
  if (witness.advantage > eps + kDominanceTolerance) return std::move(witness.belief);
  return std::nullopt;
}

std::size_t best_index(const Belief& b, const VectorSet& w, const Region& r) {
  if (w.empty()) throw std::invalid_argument("best() of an empty set");
  const LocalSet set(w, r);
  std::vector<double> local(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) local[k] = b[r[k]];
  const std::vector<std::size_t> members = all_indices(w.size());
  return local_best(local, set, members);
}

const ValueVector& best(const Belief& b, const VectorSet& w, const Region& r) {
  return w[best_index(b, w, r)];
}

VectorSet pointwise_purge(const VectorSet& w, const Region& r) {
  if (w.empty()) return {};
  const LocalSet set(w, r);
  VectorSet out;
  for (std::size_t i : local_pointwise_purge(set)) out.push_back(w[i]);
  return out;
}

VectorSet purge_region(const VectorSet& w, const Region& r, double tolerance) {
  if (w.empty()) return {};
  if (tolerance < 0.0) throw std::invalid_argument("purge tolerance must be non-negative");
  const LocalSet set(w, r);
  VectorSet out;
  for (std::size_t i : local_purge(set, tolerance)) out.push_back(w[i]);
  return out;
}

VectorSet purge(const VectorSet& w, double tolerance) {
  if (w.empty()) return {};
  return purge_region(w, Region::all(w.front().values.size()), tolerance);
}

}  // namespace ropo
