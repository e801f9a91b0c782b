#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ropo {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;
using ObservationIndex = std::size_t;

/// Tag for vectors that do not correspond to the root of a policy tree.
inline constexpr ActionIndex kNoAction = std::numeric_limits<ActionIndex>::max();

/// Absolute tolerance for every "sums to one" check.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Raised by validate() and by anything that refuses a malformed model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by belief_update() when the observation cannot occur under (b, a).
class ZeroProbabilityObservation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Finite POMDP with a previous-state-dependent observation kernel.
 *
 * Tables are stored densely:
 *   transition  T[a][s][s+]
 *   observation O[a][s-][s+][o]
 *   reward      r[s][a]
 *
 * Most models (every "standard" POMDP) have observations that ignore s-. Those
 * keep a single [a][s+][o] block which all previous states share; the full
 * four-index table is only materialised once set_observation() is called with
 * a specific previous state.
 */
class Pomdp {
 public:
  Pomdp() = default;
  Pomdp(std::size_t num_states, std::size_t num_actions, std::size_t num_observations,
        double discount);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_observations() const { return num_observations_; }
  double discount() const { return discount_; }
  void set_discount(double discount) { discount_ = discount; }

  double transition(ActionIndex a, StateIndex s, StateIndex s_next) const {
    return transition_[(a * num_states_ + s) * num_states_ + s_next];
  }
  void set_transition(ActionIndex a, StateIndex s, StateIndex s_next, double p);
  /// Row T[a][s][.] as a contiguous span.
  std::span<const double> transition_row(ActionIndex a, StateIndex s) const {
    return {transition_.data() + (a * num_states_ + s) * num_states_, num_states_};
  }

  double observation(ActionIndex a, StateIndex s_prev, StateIndex s_next,
                     ObservationIndex o) const {
    if (!observation_uses_previous_) {
      return observation_[(a * num_states_ + s_next) * num_observations_ + o];
    }
    return observation_[((a * num_states_ + s_prev) * num_states_ + s_next) *
                            num_observations_ +
                        o];
  }
  /// Sets P(o | s+, a, s-) for every previous state s-.
  void set_observation(ActionIndex a, StateIndex s_next, ObservationIndex o, double p);
  /// Sets P(o | s+, a, s-) for one previous state.
  void set_observation(ActionIndex a, StateIndex s_prev, StateIndex s_next, ObservationIndex o,
                       double p);
  bool observation_uses_previous_state() const { return observation_uses_previous_; }

  double reward(StateIndex s, ActionIndex a) const { return reward_[s * num_actions_ + a]; }
  void set_reward(StateIndex s, ActionIndex a, double value) {
    reward_[s * num_actions_ + a] = value;
  }
  double min_reward() const;

  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  std::vector<std::string> observation_names;
  /// Optional initial distribution; empty when the document does not give one.
  std::vector<double> start;

  bool operator==(const Pomdp& other) const;

 private:
  void expand_observation_table();

  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::size_t num_observations_ = 0;
  double discount_ = 0.0;
  bool observation_uses_previous_ = false;
  std::vector<double> transition_;
  std::vector<double> observation_;
  std::vector<double> reward_;
};

/// Probability vector over states.
class Belief {
 public:
  Belief() = default;
  /// Throws std::invalid_argument unless entries are >= 0 and sum to 1.
  explicit Belief(std::vector<double> probs);

  static Belief point(std::size_t num_states, StateIndex s);
  static Belief uniform(std::size_t num_states);

  std::size_t size() const { return probs_.size(); }
  double operator[](StateIndex s) const { return probs_[s]; }
  std::span<const double> values() const { return probs_; }

  bool operator==(const Belief&) const = default;

 private:
  std::vector<double> probs_;
};

/// Throws ModelError naming the first violated table row.
void validate(const Pomdp& model);

/// P(s+, o | s, a) = T[a][s][s+] * O[a][s][s+][o].
inline double joint_prob(const Pomdp& model, StateIndex s, ActionIndex a, StateIndex s_next,
                         ObservationIndex o) {
  return model.transition(a, s, s_next) * model.observation(a, s, s_next, o);
}

/// Posterior after doing a and seeing o. Throws ZeroProbabilityObservation.
Belief belief_update(const Pomdp& model, const Belief& b, ActionIndex a, ObservationIndex o);

/// Sum_s b(s) r(s, a).
double expected_reward(const Pomdp& model, const Belief& b, ActionIndex a);

/// P(o | b, a).
double observation_prob(const Pomdp& model, const Belief& b, ActionIndex a, ObservationIndex o);

}  // namespace ropo
