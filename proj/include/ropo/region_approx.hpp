#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "ropo/exact_solver.hpp"
#include "ropo/pomdp.hpp"
#include "ropo/vectors.hpp"

namespace ropo {

/**
 * Ordered cover of the state space in which no region contains another.
 * The order is the tie-breaking order the oracle uses.
 */
class RegionSystem {
 public:
  /// Throws std::invalid_argument if the regions do not cover [0, num_states)
  /// or one region is a subset of another.
  RegionSystem(std::vector<Region> regions, std::size_t num_states);

  std::size_t size() const { return regions_.size(); }
  std::size_t num_states() const { return num_states_; }
  const Region& operator[](std::size_t i) const { return regions_[i]; }
  std::span<const Region> regions() const { return regions_; }
  /// Indices of the regions containing s, ascending.
  std::span<const std::size_t> containing(StateIndex s) const { return containing_[s]; }

 private:
  std::vector<Region> regions_;
  std::size_t num_states_;
  std::vector<std::vector<std::size_t>> containing_;
};

/// For each state, the states that are the most probable outcome of some action.
std::vector<std::vector<StateIndex>> ideal_step(const Pomdp& model);

/// Per-state balls of k-step ideal reachability, with subsets removed in
/// ascending centre order.
RegionSystem radius_k_regions(const Pomdp& model, std::size_t k);

/// sum_{s in r} f(s) / sum_s f(s). Throws std::invalid_argument on zero mass.
double degree_of_support(std::span<const double> f, const Region& r);

/// Observation of the region-observable model: the agent's own observation
/// plus the index of the region the oracle reported.
struct RegionalObservation {
  ObservationIndex observation = 0;
  std::size_t region = 0;

  auto operator<=>(const RegionalObservation&) const = default;
};

/// One non-zero entry of P(s+, z | s, a) in the region-observable model.
struct RegionalTransition {
  RegionalObservation z;
  StateIndex next;
  double prob;
};

/**
 * Region-observable POMDP built from a base model and a region system.
 *
 * The oracle picks, among the regions containing the true state, the one that
 * best supports P(., o | s-, a-), first in system order on ties. The sparse
 * joint kernel and the feasible observation sets Z_{a,R} of every system
 * region are computed once at construction.
 */
class Ropomdp {
 public:
  Ropomdp(Pomdp base, RegionSystem regions);

  const Pomdp& base() const { return base_; }
  const RegionSystem& regions() const { return regions_; }

  std::size_t oracle_region(StateIndex s_true, ObservationIndex o, StateIndex s_prev,
                            ActionIndex a_prev) const;

  /// P(z | s+, a, s-) = P(o | s+, a, s-) * [region of z is the oracle's choice].
  double transformed_obs_prob(StateIndex s_next, ActionIndex a, StateIndex s_prev,
                              RegionalObservation z) const;

  /// P(s+, z | s, a).
  double joint_prob(StateIndex s, ActionIndex a, StateIndex s_next, RegionalObservation z) const;

  /// Non-zero entries of P(., . | s, a), sorted by (z, s+).
  std::span<const RegionalTransition> kernel(StateIndex s, ActionIndex a) const {
    return kernel_[s * base_.num_actions() + a];
  }

  /// Z_{a,R} for a system region, sorted.
  std::span<const RegionalObservation> feasible_observations(ActionIndex a,
                                                             std::size_t region) const {
    return feasible_[region * base_.num_actions() + a];
  }
  /// Z_{a,R} for an arbitrary region.
  std::vector<RegionalObservation> feasible_observations(ActionIndex a, const Region& r) const;

  std::size_t num_regional_observations() const {
    return base_.num_observations() * regions_.size();
  }

 private:
  template <class F>
  std::size_t choose_region(StateIndex s_true, F&& mass) const;

  Pomdp base_;
  RegionSystem regions_;
  std::vector<std::vector<RegionalTransition>> kernel_;
  std::vector<std::vector<RegionalObservation>> feasible_;
};

/// One value set per system region, indexed like the region system.
struct RegionalValueSets {
  std::vector<VectorSet> sets;
};

/// Q-set for (a, z) restricted to r; vectors are zero outside r.
VectorSet regional_q_set(const Ropomdp& rop, const RegionalValueSets& prev, ActionIndex a,
                         RegionalObservation z, const Region& r);

/// Parsimonious covering, in r, of the next-stage value functions. Entries
/// outside r are zero. prune_tolerance is passed to every purge.
VectorSet ropomdp_update(const Ropomdp& rop, const Region& r, const RegionalValueSets& prev,
                         double prune_tolerance = 0.0);

/// Same as above for a system region, using the cached Z_{a,R}.
VectorSet ropomdp_update(const Ropomdp& rop, std::size_t region, const RegionalValueSets& prev,
                         double prune_tolerance = 0.0);

/**
 * True when the restricted Bellman residual between curr and prev is at most
 * eps. With non-negative rewards values only grow, so the check of prev's
 * vectors against curr is skipped.
 */
bool ropomdp_stop(const RegionSystem& regions, const RegionalValueSets& curr,
                  const RegionalValueSets& prev, double eps, bool rewards_nonnegative);

struct RegionalSolveOptions {
  double eps = 0.001;
  std::size_t max_iterations = 10000;
  /// Worker threads for the per-region updates.
  std::size_t jobs = 1;
  /// Slack for every purge. 0 keeps the sets parsimonious; a small positive
  /// value drops vectors that add at most this much, which keeps noisy models
  /// tractable at radius >= 1.
  double prune_tolerance = 0.0;
};

struct RegionalSolveReport {
  RegionalValueSets values;
  std::size_t iterations = 0;
  /// Constant added to every reward while iterating (0 when all are >= 0).
  double reward_shift = 0.0;
  /// Total set size and wall time per iteration.
  std::vector<IterationRecord> history;
};

/// Restricted value iteration. Returned values are for the unshifted rewards.
RegionalSolveReport solve_ropomdp(const Ropomdp& rop, const RegionalSolveOptions& options = {});

/// Value of b under the first region that fully supports it.
/// Throws std::invalid_argument when no region does.
double regional_value(const RegionSystem& regions, const RegionalValueSets& values,
                      const Belief& b);

/// Greedy action for any belief using the regional value sets (ties: lowest action).
ActionIndex approx_action(const Ropomdp& rop, const RegionalValueSets& values, const Belief& b);

/// Posterior under the region-observable kernel.
Belief regional_belief_update(const Ropomdp& rop, const Belief& b, ActionIndex a,
                              RegionalObservation z);

}  // namespace ropo
