#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "ropo/pomdp.hpp"
#include "ropo/region_approx.hpp"

namespace ropo {

struct TrialConfig {
  std::size_t max_steps = 100;
  std::uint64_t seed = 0;
  /// Start-state distribution; empty means uniform.
  std::vector<double> initial;
  std::vector<StateIndex> goal_states;
  ActionIndex declare_action = 0;
};

struct TrialResult {
  StateIndex start = 0;
  /// Actions taken before the declaration (max_steps when none was made).
  std::size_t steps = 0;
  bool declared = false;
  /// gamma^steps for a correct declaration, otherwise 0.
  double reward = 0.0;
};

struct CampaignStats {
  std::size_t trials = 0;
  double mean_m = 0.0;
  double mean_m_prime = 0.0;
  /// mean_m_prime - mean_m
  double difference = 0.0;
  double se_m = 0.0;
  double se_m_prime = 0.0;
  /// Standard error of the paired per-trial differences.
  double se_difference = 0.0;
};

struct Campaign {
  CampaignStats stats;
  std::vector<TrialResult> m;
  std::vector<TrialResult> m_prime;
};

/**
 * Counter-based random stream: the k-th draw is a pure function of
 * (seed, trial, stream, k), so paired runs see the same numbers.
 */
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream);
  /// Uniform in [0, 1).
  double next();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum StreamId : std::uint64_t { kStartStream = 0, kTransitionStream = 1, kObservationStream = 2 };

/// Inverse-CDF draw from a distribution given u in [0, 1).
std::size_t sample_index(std::span<const double> probs, double u);

/// Agent alone: belief starts at the start state and follows the base kernel;
/// actions come from approx_action.
TrialResult run_trial_m(const Ropomdp& rop, const RegionalValueSets& values,
                        const TrialConfig& cfg, std::uint64_t trial, StateIndex start);

/// Agent with the oracle: observations carry the oracle's region and the
/// belief follows the region-observable kernel.
TrialResult run_trial_m_prime(const Ropomdp& rop, const RegionalValueSets& values,
                              const TrialConfig& cfg, std::uint64_t trial, StateIndex start);

/// Start state of a trial, drawn from its start stream.
StateIndex draw_start(const TrialConfig& cfg, std::size_t num_states, std::uint64_t trial);

/// n_trials paired trials; results do not depend on jobs.
Campaign run_campaign(const Ropomdp& rop, const RegionalValueSets& values, const TrialConfig& cfg,
                      std::size_t n_trials, std::size_t jobs = 1);

CampaignStats summarize(const std::vector<TrialResult>& m, const std::vector<TrialResult>& m_prime);

/// Per-trial CSV rows for both worlds followed by summary rows.
void write_campaign_csv(std::ostream& out, const Campaign& campaign);

}  // namespace ropo
