#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ropo/pomdp.hpp"
#include "ropo/vectors.hpp"

namespace ropo {

class IterationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  double eps = 0.001;
  std::size_t max_iterations = 10000;
};

struct IterationRecord {
  std::size_t set_size = 0;
  double residual = 0.0;
  double seconds = 0.0;
};

struct SolveReport {
  VectorSet values;
  std::size_t iterations = 0;
  double residual = 0.0;
  /// Loss bound of the greedy policy, 2*eps*gamma/(1-gamma).
  double loss_bound = 0.0;
  std::vector<IterationRecord> history;
};

/// {gamma * sum_{s+} alpha(s+) P(s+, o | s, a) : alpha in prev}, untagged.
VectorSet q_set(const Pomdp& model, const VectorSet& prev, ActionIndex a, ObservationIndex o);

/// Purge after every cross sum; the first set is purged as well.
VectorSet incr_pruning(std::span<const VectorSet> sets, const Region& r);

/// One dynamic-programming update by incremental pruning. An empty prev is
/// treated as {0}.
VectorSet dp_update(const Pomdp& model, const VectorSet& prev);

/// Monahan enumeration: every |A|*|prev|^|O| candidate, then a single purge.
/// Throws std::length_error when the candidate count exceeds cap.
VectorSet exhaustive_update(const Pomdp& model, const VectorSet& prev,
                            std::size_t cap = 1'000'000);

/// Conditional plan: root action plus one subtree per observation (none at depth 1).
struct PolicyTree {
  ActionIndex action = 0;
  std::vector<PolicyTree> children;

  std::size_t depth() const { return children.empty() ? 1 : 1 + children.front().depth(); }
};

double policy_tree_value(const Pomdp& model, const PolicyTree& tree, StateIndex s);

/// All trees of the given depth; there are |A|^((|O|^t - 1)/(|O| - 1)) of them.
std::vector<PolicyTree> enumerate_policy_trees(const Pomdp& model, std::size_t depth);
std::size_t policy_tree_count(std::size_t num_actions, std::size_t num_observations,
                              std::size_t depth);

/// max over beliefs of |curr(b) - prev(b)|, computed with one LP per vector.
double bellman_residual(const VectorSet& curr, const VectorSet& prev);

SolveReport solve_pomdp(const Pomdp& model, const SolveOptions& options = {});

/// Greedy one-step lookahead on a value set. Ties go to the lowest action.
ActionIndex greedy_action(const Pomdp& model, const VectorSet& values, const Belief& b);

}  // namespace ropo
