#include "ropo/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ropo {

Pomdp::Pomdp(std::size_t num_states, std::size_t num_actions, std::size_t num_observations,
             double discount)
    : num_states_(num_states),
      num_actions_(num_actions),
      num_observations_(num_observations),
      discount_(discount),
      transition_(num_actions * num_states * num_states, 0.0),
      observation_(num_actions * num_states * num_observations, 0.0),
      reward_(num_states * num_actions, 0.0) {
  if (num_states == 0 || num_actions == 0 || num_observations == 0) {
    throw ModelError("a POMDP needs at least one state, action and observation");
  }
}

void Pomdp::set_transition(ActionIndex a, StateIndex s, StateIndex s_next, double p) {
  transition_[(a * num_states_ + s) * num_states_ + s_next] = p;
}

void Pomdp::set_observation(ActionIndex a, StateIndex s_next, ObservationIndex o, double p) {
  if (!observation_uses_previous_) {
    observation_[(a * num_states_ + s_next) * num_observations_ + o] = p;
    return;
  }
  for (StateIndex s_prev = 0; s_prev < num_states_; ++s_prev) {
    observation_[((a * num_states_ + s_prev) * num_states_ + s_next) * num_observations_ + o] = p;
  }
}

void Pomdp::set_observation(ActionIndex a, StateIndex s_prev, StateIndex s_next,
                            ObservationIndex o, double p) {
  expand_observation_table();
  observation_[((a * num_states_ + s_prev) * num_states_ + s_next) * num_observations_ + o] = p;
}

void Pomdp::expand_observation_table() {
  if (observation_uses_previous_) return;
  std::vector<double> full(num_actions_ * num_states_ * num_states_ * num_observations_);
  for (ActionIndex a = 0; a < num_actions_; ++a) {
    for (StateIndex s_prev = 0; s_prev < num_states_; ++s_prev) {
      for (StateIndex s_next = 0; s_next < num_states_; ++s_next) {
        const auto src = observation_.begin() +
                         static_cast<std::ptrdiff_t>((a * num_states_ + s_next) * num_observations_);
        auto dst = full.begin() + static_cast<std::ptrdiff_t>(
                                      ((a * num_states_ + s_prev) * num_states_ + s_next) *
                                      num_observations_);
        std::copy(src, src + static_cast<std::ptrdiff_t>(num_observations_), dst);
      }
    }
  }
  observation_ = std::move(full);
  observation_uses_previous_ = true;
}

double Pomdp::min_reward() const { return *std::min_element(reward_.begin(), reward_.end()); }

bool Pomdp::operator==(const Pomdp& other) const {
  if (num_states_ != other.num_states_ || num_actions_ != other.num_actions_ ||
      num_observations_ != other.num_observations_ || discount_ != other.discount_ ||
      transition_ != other.transition_ || reward_ != other.reward_ ||
      state_names != other.state_names || action_names != other.action_names ||
      observation_names != other.observation_names || start != other.start) {
    return false;
  }
  if (observation_uses_previous_ == other.observation_uses_previous_) {
    return observation_ == other.observation_;
  }
  for (ActionIndex a = 0; a < num_actions_; ++a)
    for (StateIndex sp = 0; sp < num_states_; ++sp)
      for (StateIndex sn = 0; sn < num_states_; ++sn)
        for (ObservationIndex o = 0; o < num_observations_; ++o)
          if (observation(a, sp, sn, o) != other.observation(a, sp, sn, o)) return false;
  return true;
}

Belief::Belief(std::vector<double> probs) : probs_(std::move(probs)) {
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("belief has a negative or NaN entry");
    total += p;
  }
  if (probs_.empty() || std::abs(total - 1.0) > kProbabilityTolerance) {
    throw std::invalid_argument("belief does not sum to one");
  }
}

Belief Belief::point(std::size_t num_states, StateIndex s) {
  std::vector<double> probs(num_states, 0.0);
  probs.at(s) = 1.0;
  return Belief(std::move(probs));
}

Belief Belief::uniform(std::size_t num_states) {
  return Belief(std::vector<double>(num_states, 1.0 / static_cast<double>(num_states)));
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void validate(const Pomdp& model) {
  const std::size_t n = model.num_states();
  if (!(model.discount() >= 0.0 && model.discount() < 1.0)) {
    throw ModelError("discount must lie in [0, 1), got " + std::to_string(model.discount()));
  }
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    for (StateIndex s = 0; s < n; ++s) {
      double mass = 0.0;
      for (StateIndex s2 = 0; s2 < n; ++s2) {
        const double p = model.transition(a, s, s2);
        if (!is_probability(p)) {
          std::ostringstream msg;
          msg << "T[" << a << "][" << s << "][" << s2 << "] = " << p << " is not a probability";
          throw ModelError(msg.str());
        }
        mass += p;
      }
      if (std::abs(mass - 1.0) > kProbabilityTolerance) {
        std::ostringstream msg;
        msg << "transition row (a=" << a << ", s=" << s << ") sums to " << mass
            << " (residual " << mass - 1.0 << ")";
        throw ModelError(msg.str());
      }
    }
  }
  const std::size_t prev_count = model.observation_uses_previous_state() ? n : 1;
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    for (StateIndex sp = 0; sp < prev_count; ++sp) {
      for (StateIndex s2 = 0; s2 < n; ++s2) {
        double mass = 0.0;
        for (ObservationIndex o = 0; o < model.num_observations(); ++o) {
          const double p = model.observation(a, sp, s2, o);
          if (!is_probability(p)) {
            std::ostringstream msg;
            msg << "O[" << a << "][" << sp << "][" << s2 << "][" << o << "] = " << p
                << " is not a probability";
            throw ModelError(msg.str());
          }
          mass += p;
        }
        if (std::abs(mass - 1.0) > kProbabilityTolerance) {
          std::ostringstream msg;
          msg << "observation row (a=" << a << ", s-="
              << (model.observation_uses_previous_state() ? std::to_string(sp) : "*")
              << ", s+=" << s2 << ") sums to " << mass << " (residual " << mass - 1.0 << ")";
          throw ModelError(msg.str());
        }
      }
    }
  }
  if (!model.start.empty()) {
    if (model.start.size() != n) throw ModelError("start distribution has wrong length");
    double mass = 0.0;
    for (double p : model.start) {
      if (!is_probability(p)) throw ModelError("start distribution has a non-probability");
      mass += p;
    }
    if (std::abs(mass - 1.0) > kProbabilityTolerance) {
      throw ModelError("start distribution sums to " + std::to_string(mass));
    }
  }
}

Belief belief_update(const Pomdp& model, const Belief& b, ActionIndex a, ObservationIndex o) {
  const std::size_t n = model.num_states();
  std::vector<double> next(n, 0.0);
  for (StateIndex s = 0; s < n; ++s) {
    const double weight = b[s];
    if (weight == 0.0) continue;
    for (StateIndex s2 = 0; s2 < n; ++s2) {
      next[s2] += joint_prob(model, s, a, s2, o) * weight;
    }
  }
  double total = 0.0;
  for (double v : next) total += v;
  if (total <= 0.0) {
    throw ZeroProbabilityObservation("observation " + std::to_string(o) +
                                     " has zero probability after action " + std::to_string(a));
  }
  for (double& v : next) v /= total;
  return Belief(std::move(next));
}

double expected_reward(const Pomdp& model, const Belief& b, ActionIndex a) {
  double value = 0.0;
  for (StateIndex s = 0; s < model.num_states(); ++s) value += b[s] * model.reward(s, a);
  return value;
}

double observation_prob(const Pomdp& model, const Belief& b, ActionIndex a, ObservationIndex o) {
  const std::size_t n = model.num_states();
  double total = 0.0;
  for (StateIndex s = 0; s < n; ++s) {
    if (b[s] == 0.0) continue;
    double inner = 0.0;
    for (StateIndex s2 = 0; s2 < n; ++s2) inner += joint_prob(model, s, a, s2, o);
    total += inner * b[s];
  }
  return total;
}

}  // namespace ropo
