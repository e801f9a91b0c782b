// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the solver code it is meant to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "ropo/pomdp.hpp"
#include "ropo/simplex.hpp"
#include "ropo/vectors.hpp"

namespace oracle {

using ropo::Belief;
using ropo::Pomdp;

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n,
                                               double zero_chance = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    v = unit(rng) < zero_chance ? 0.0 : unit(rng) + 1e-3;
    total += v;
  }
  if (total == 0.0) {
    p[rng() % n] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  // absorb the normalisation round-off in the largest entry
  double sum = 0.0;
  for (double v : p) sum += v;
  *std::max_element(p.begin(), p.end()) += 1.0 - sum;
  return p;
}

/// Random model; observations depend on the previous state when asked.
inline Pomdp random_pomdp(std::mt19937_64& rng, std::size_t n, std::size_t na, std::size_t no,
                          double gamma, bool nonnegative_rewards = true,
                          bool previous_state_observations = false) {
  Pomdp m(n, na, no, gamma);
  std::uniform_real_distribution<double> reward(nonnegative_rewards ? 0.0 : -1.0, 1.0);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t s = 0; s < n; ++s) {
      const auto row = random_distribution(rng, n, 0.3);
      for (std::size_t s2 = 0; s2 < n; ++s2) m.set_transition(a, s, s2, row[s2]);
      m.set_reward(s, a, reward(rng));
    }
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      if (previous_state_observations) {
        for (std::size_t sp = 0; sp < n; ++sp) {
          const auto row = random_distribution(rng, no, 0.3);
          for (std::size_t o = 0; o < no; ++o) m.set_observation(a, sp, s2, o, row[o]);
        }
      } else {
        const auto row = random_distribution(rng, no, 0.3);
        for (std::size_t o = 0; o < no; ++o) m.set_observation(a, s2, o, row[o]);
      }
    }
  }
  return m;
}

inline Belief random_belief(std::mt19937_64& rng, std::size_t n) {
  // uniform on the simplex via sorted spacings of exponentials
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) total += (v = e(rng));
  for (double& v : p) v /= total;
  double sum = 0.0;
  for (double v : p) sum += v;
  p[0] += 1.0 - sum;
  if (p[0] < 0.0) p[0] = 0.0;
  return Belief(std::move(p));
}

/// Random belief supported on the given states.
inline Belief random_belief_in(std::mt19937_64& rng, const std::vector<std::size_t>& states,
                               std::size_t n) {
  const Belief local = random_belief(rng, states.size());
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < states.size(); ++k) p[states[k]] = local[k];
  return Belief(std::move(p));
}

inline double value_of(const std::vector<double>& alpha, const Belief& b) {
  double v = 0.0;
  for (std::size_t s = 0; s < alpha.size(); ++s) v += alpha[s] * b[s];
  return v;
}

/// max over a plain list of vectors; 0 for none.
inline double max_value(const ropo::VectorSet& set, const Belief& b) {
  if (set.empty()) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : set) best = std::max(best, value_of(v.values, b));
  return best;
}

/// Value of the full cross sum of the sets at b: pick the best member of each set.
inline double cross_sum_value(const std::vector<ropo::VectorSet>& sets, const Belief& b) {
  double total = 0.0;
  for (const auto& set : sets) total += max_value(set, b);
  return total;
}

/// All points of the simplex over d coordinates with the given step.
inline std::vector<std::vector<double>> simplex_grid(std::size_t d, double step) {
  const int k = static_cast<int>(std::lround(1.0 / step));
  std::vector<std::vector<double>> out;
  std::vector<int> counts(d, 0);
  auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
    if (pos + 1 == d) {
      counts[pos] = left;
      std::vector<double> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = counts[i] / static_cast<double>(k);
      out.push_back(std::move(p));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[pos] = c;
      self(self, pos + 1, left - c);
    }
  };
  rec(rec, 0, k);
  return out;
}

/// Fully observable value iteration until successive values differ by at most tol.
struct MdpSolution {
  std::vector<double> values;
  std::vector<std::vector<double>> q;  // [s][a]
};

inline MdpSolution mdp_value_iteration(const Pomdp& m, double tol) {
  const std::size_t n = m.num_states();
  const std::size_t na = m.num_actions();
  MdpSolution sol{std::vector<double>(n, 0.0), std::vector<std::vector<double>>(n, std::vector<double>(na))};
  while (true) {
    double change = 0.0;
    std::vector<double> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        double future = 0.0;
        for (std::size_t s2 = 0; s2 < n; ++s2) future += m.transition(a, s, s2) * sol.values[s2];
        sol.q[s][a] = m.reward(s, a) + m.discount() * future;
        best = std::max(best, sol.q[s][a]);
      }
      next[s] = best;
      change = std::max(change, std::abs(best - sol.values[s]));
    }
    sol.values = std::move(next);
    if (change <= tol) break;
  }
  return sol;
}

/// t applications of the fully observable Bellman backup starting from 0.
inline std::vector<double> mdp_backups(const Pomdp& m, std::size_t t) {
  std::vector<double> v(m.num_states(), 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    std::vector<double> next(m.num_states());
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        double future = 0.0;
        for (std::size_t s2 = 0; s2 < m.num_states(); ++s2) future += m.transition(a, s, s2) * v[s2];
        best = std::max(best, m.reward(s, a) + m.discount() * future);
      }
      next[s] = best;
    }
    v = std::move(next);
  }
  return v;
}

/// Optimal t-step value at b by direct recursion over observations (no vectors).
inline double horizon_value(const Pomdp& m, const Belief& b, std::size_t t) {
  if (t == 0) return 0.0;
  const std::size_t n = m.num_states();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    double q = 0.0;
    for (std::size_t s = 0; s < n; ++s) q += b[s] * m.reward(s, a);
    for (std::size_t o = 0; o < m.num_observations(); ++o) {
      std::vector<double> next(n, 0.0);
      double mass = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t s2 = 0; s2 < n; ++s2) {
          const double p = b[s] * m.transition(a, s, s2) * m.observation(a, s, s2, o);
          next[s2] += p;
          mass += p;
        }
      }
      if (mass <= 0.0) continue;
      for (double& v : next) v /= mass;
      double sum = 0.0;
      for (double v : next) sum += v;
      next[0] += 1.0 - sum;
      if (next[0] < 0.0) next[0] = 0.0;
      q += m.discount() * mass * horizon_value(m, Belief(std::move(next)), t - 1);
    }
    best = std::max(best, q);
  }
  return best;
}

/// Optimum of an LP over a bounded polytope (all variables >= 0) by trying
/// every vertex: each choice of n tight rows is solved by Gaussian elimination.
/// Returns nullopt when no vertex is feasible.
inline std::optional<double> lp_vertex_optimum(const ropo::LinearProgram& lp, double tol = 1e-7) {
  const std::size_t n = lp.objective.size();
  struct Row {
    std::vector<double> a;
    double b;
    ropo::Relation rel;
  };
  std::vector<Row> rows;
  for (const auto& c : lp.constraints) rows.push_back({c.coefficients, c.rhs, c.relation});
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    rows.push_back({e, 0.0, ropo::Relation::kGreaterEqual});
  }
  auto feasible = [&](const std::vector<double>& x) {
    for (const auto& r : rows) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += r.a[j] * x[j];
      if (r.rel != ropo::Relation::kGreaterEqual && lhs > r.b + tol) return false;
      if (r.rel != ropo::Relation::kLessEqual && lhs < r.b - tol) return false;
    }
    return true;
  };
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  auto solve_pick = [&]() {
    std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m[i][j] = rows[pick[i]].a[j];
      m[i][n] = rows[pick[i]].b;
    }
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t p = c;
      for (std::size_t i = c + 1; i < n; ++i)
        if (std::abs(m[i][c]) > std::abs(m[p][c])) p = i;
      if (std::abs(m[p][c]) < 1e-12) return;
      std::swap(m[p], m[c]);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == c) continue;
        const double f = m[i][c] / m[c][c];
        for (std::size_t j = c; j <= n; ++j) m[i][j] -= f * m[c][j];
      }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    if (!feasible(x)) return;
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += lp.objective[j] * x[j];
    if (!best || v > *best) best = v;
  };
  auto rec = [&](auto&& self, std::size_t depth, std::size_t from) -> void {
    if (depth == n) {
      solve_pick();
      return;
    }
    for (std::size_t i = from; i + (n - depth) <= rows.size(); ++i) {
      pick[depth] = i;
      self(self, depth + 1, i + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

}  // namespace oracle
