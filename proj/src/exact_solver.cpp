#include "ropo/exact_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "detail.hpp"

namespace ropo {
namespace {

VectorSet zero_set(std::size_t n) { return {ValueVector{std::vector<double>(n, 0.0), kNoAction}}; }

const VectorSet& or_zero(const VectorSet& prev, const VectorSet& zero) {
  return prev.empty() ? zero : prev;
}

ValueVector reward_vector(const Pomdp& model, ActionIndex a) {
  ValueVector r{std::vector<double>(model.num_states()), a};
  for (StateIndex s = 0; s < model.num_states(); ++s) r.values[s] = model.reward(s, a);
  return r;
}

}  // namespace

VectorSet q_set(const Pomdp& model, const VectorSet& prev, ActionIndex a, ObservationIndex o) {
  const std::size_t n = model.num_states();
  const double gamma = model.discount();
  VectorSet out;
  out.reserve(prev.size());
  for (const ValueVector& alpha : prev) {
    ValueVector beta{std::vector<double>(n, 0.0), kNoAction};
    for (StateIndex s = 0; s < n; ++s) {
      double total = 0.0;
      for (StateIndex s2 = 0; s2 < n; ++s2) {
        const double p = joint_prob(model, s, a, s2, o);
        if (p != 0.0) total += alpha.values[s2] * p;
      }
      beta.values[s] = gamma * total;
    }
    out.push_back(std::move(beta));
  }
  return out;
}

VectorSet incr_pruning(std::span<const VectorSet> sets, const Region& r) {
  if (sets.empty()) throw std::invalid_argument("incr_pruning needs at least one set");
  VectorSet w = purge_region(sets.front(), r);
  for (std::size_t i = 1; i < sets.size(); ++i) w = purge_region(cross_sum(w, sets[i]), r);
  return w;
}

VectorSet dp_update(const Pomdp& model, const VectorSet& prev_in) {
  const VectorSet zero = zero_set(model.num_states());
  const VectorSet& prev = or_zero(prev_in, zero);
  const Region everything = Region::all(model.num_states());
  VectorSet candidates;
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    std::vector<VectorSet> q;
    q.reserve(model.num_observations());
    for (ObservationIndex o = 0; o < model.num_observations(); ++o) q.push_back(q_set(model, prev, a, o));
    const VectorSet w_a = incr_pruning(q, everything);
    for (ValueVector& v : cross_sum({reward_vector(model, a)}, w_a)) candidates.push_back(std::move(v));
  }
  return purge(candidates);
}

VectorSet exhaustive_update(const Pomdp& model, const VectorSet& prev_in, std::size_t cap) {
  const VectorSet zero = zero_set(model.num_states());
  const VectorSet& prev = or_zero(prev_in, zero);
  const std::size_t n = model.num_states();
  const std::size_t num_obs = model.num_observations();

  double count = static_cast<double>(model.num_actions()) *
                 std::pow(static_cast<double>(prev.size()), static_cast<double>(num_obs));
  if (count > static_cast<double>(cap)) {
    throw std::length_error("exhaustive update would enumerate " + std::to_string(count) +
                            " candidates (cap " + std::to_string(cap) + ")");
  }

  VectorSet candidates;
  candidates.reserve(static_cast<std::size_t>(count));
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    std::vector<VectorSet> q;
    for (ObservationIndex o = 0; o < num_obs; ++o) q.push_back(q_set(model, prev, a, o));
    const ValueVector r = reward_vector(model, a);
    std::vector<std::size_t> choice(num_obs, 0);
    while (true) {
      std::vector<double> acc = q[0][choice[0]].values;
      for (ObservationIndex o = 1; o < num_obs; ++o) {
        const std::vector<double>& add = q[o][choice[o]].values;
        for (StateIndex s = 0; s < n; ++s) acc[s] += add[s];
      }
      for (StateIndex s = 0; s < n; ++s) acc[s] = r.values[s] + acc[s];
      candidates.push_back(ValueVector{std::move(acc), a});
      // odometer over observation choices
      std::size_t pos = 0;
      while (pos < num_obs && ++choice[pos] == prev.size()) choice[pos++] = 0;
      if (pos == num_obs) break;
    }
  }
  return purge(candidates);
}

double policy_tree_value(const Pomdp& model, const PolicyTree& tree, StateIndex s) {
  double value = model.reward(s, tree.action);
  if (tree.children.empty()) return value;
  double future = 0.0;
  for (StateIndex s2 = 0; s2 < model.num_states(); ++s2) {
    const double t = model.transition(tree.action, s, s2);
    if (t == 0.0) continue;
    for (ObservationIndex o = 0; o < model.num_observations(); ++o) {
      const double p = t * model.observation(tree.action, s, s2, o);
      if (p == 0.0) continue;
      future += p * policy_tree_value(model, tree.children[o], s2);
    }
  }
  return value + model.discount() * future;
}

std::vector<PolicyTree> enumerate_policy_trees(const Pomdp& model, std::size_t depth) {
  if (depth == 0) throw std::invalid_argument("policy trees have depth >= 1");
  std::vector<PolicyTree> out;
  if (depth == 1) {
    for (ActionIndex a = 0; a < model.num_actions(); ++a) out.push_back(PolicyTree{a, {}});
    return out;
  }
  const std::vector<PolicyTree> sub = enumerate_policy_trees(model, depth - 1);
  const std::size_t num_obs = model.num_observations();
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    std::vector<std::size_t> choice(num_obs, 0);
    while (true) {
      PolicyTree tree{a, {}};
      tree.children.reserve(num_obs);
      for (ObservationIndex o = 0; o < num_obs; ++o) tree.children.push_back(sub[choice[o]]);
      out.push_back(std::move(tree));
      std::size_t pos = 0;
      while (pos < num_obs && ++choice[pos] == sub.size()) choice[pos++] = 0;
      if (pos == num_obs) break;
    }
  }
  return out;
}

std::size_t policy_tree_count(std::size_t num_actions, std::size_t num_observations,
                              std::size_t depth) {
  // Number of nodes: 1 + |O| + ... + |O|^(t-1).
  std::size_t nodes = 0;
  std::size_t level = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    nodes += level;
    level *= num_observations;
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i < nodes; ++i) count *= num_actions;
  return count;
}

double bellman_residual(const VectorSet& curr_in, const VectorSet& prev_in) {
  const std::size_t n = !curr_in.empty() ? curr_in.front().values.size()
                        : !prev_in.empty() ? prev_in.front().values.size()
                                           : 0;
  if (n == 0) return 0.0;
  const VectorSet zero = zero_set(n);
  const VectorSet& curr = or_zero(curr_in, zero);
  const VectorSet& prev = or_zero(prev_in, zero);
  const Region everything = Region::all(n);
  double gap = 0.0;
  for (const ValueVector& alpha : curr) gap = std::max(gap, max_advantage(alpha, prev, everything).advantage);
  for (const ValueVector& alpha : prev) gap = std::max(gap, max_advantage(alpha, curr, everything).advantage);
  return gap;
}

SolveReport solve_pomdp(const Pomdp& model, const SolveOptions& options) {
  if (!(options.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  using Clock = std::chrono::steady_clock;
  SolveReport report;
  VectorSet current = zero_set(model.num_states());
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    const auto started = Clock::now();
    VectorSet next = dp_update(model, current);
    const double residual = bellman_residual(next, current);
    const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
    report.history.push_back({next.size(), residual, seconds});
    current = std::move(next);
    if (residual <= options.eps) {
      report.values = std::move(current);
      report.iterations = t;
      report.residual = residual;
      const double gamma = model.discount();
      report.loss_bound = 2.0 * options.eps * gamma / (1.0 - gamma);
      return report;
    }
  }
  throw IterationCapExceeded("value iteration did not converge within " +
                             std::to_string(options.max_iterations) + " iterations");
}

ActionIndex greedy_action(const Pomdp& model, const VectorSet& values, const Belief& b) {
  const std::size_t n = model.num_states();
  ActionIndex chosen = 0;
  double chosen_value = 0.0;
  std::vector<double> mass(n);
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    double future = 0.0;
    for (ObservationIndex o = 0; o < model.num_observations(); ++o) {
      std::fill(mass.begin(), mass.end(), 0.0);
      double total = 0.0;
      for (StateIndex s = 0; s < n; ++s) {
        if (b[s] == 0.0) continue;
        for (StateIndex s2 = 0; s2 < n; ++s2) {
          const double p = joint_prob(model, s, a, s2, o) * b[s];
          mass[s2] += p;
          total += p;
        }
      }
      if (total <= 0.0 || values.empty()) continue;
      // P(o|b,a) * V(b+) == max_alpha alpha . (unnormalised b+)
      double top = -std::numeric_limits<double>::infinity();
      for (const ValueVector& alpha : values) {
        double v = 0.0;
        for (StateIndex s2 = 0; s2 < n; ++s2) v += alpha.values[s2] * mass[s2];
        top = std::max(top, v);
      }
      future += top;
    }
    const double q = expected_reward(model, b, a) + model.discount() * future;
    if (a == 0 || detail::improves_on(q, chosen_value)) {
      chosen = a;
      chosen_value = q;
    }
  }
  return chosen;
}

}  // namespace ropo
