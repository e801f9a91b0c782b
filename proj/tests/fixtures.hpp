// Small hand-written models shared by the tests.
#pragma once

#include "ropo/pomdp.hpp"

namespace fixture {

/// Two states, two actions, two observations; numbers chosen so hand
/// arithmetic stays short.
inline ropo::Pomdp two_state(double gamma = 0.9) {
  ropo::Pomdp m(2, 2, 2, gamma);
  m.set_transition(0, 0, 0, 0.7);
  m.set_transition(0, 0, 1, 0.3);
  m.set_transition(0, 1, 0, 0.2);
  m.set_transition(0, 1, 1, 0.8);
  for (int s = 0; s < 2; ++s) {
    m.set_transition(1, s, 0, 0.5);
    m.set_transition(1, s, 1, 0.5);
  }
  m.set_observation(0, 0, 0, 0.9);
  m.set_observation(0, 0, 1, 0.1);
  m.set_observation(0, 1, 0, 0.3);
  m.set_observation(0, 1, 1, 0.7);
  for (int s = 0; s < 2; ++s) {
    m.set_observation(1, s, 0, 0.5);
    m.set_observation(1, s, 1, 0.5);
  }
  m.set_reward(0, 0, 1.0);
  m.set_reward(1, 0, 0.0);
  m.set_reward(0, 1, 0.0);
  m.set_reward(1, 1, 1.5);
  return m;
}

/// Deterministic chain 0-1-...-(n-1): action 0 moves left, action 1 moves
/// right, action 2 stays. Observation o = state. Reward 1 for staying at the end.
inline ropo::Pomdp chain(std::size_t n, double gamma = 0.9) {
  ropo::Pomdp m(n, 3, n, gamma);
  for (std::size_t s = 0; s < n; ++s) {
    m.set_transition(0, s, s == 0 ? 0 : s - 1, 1.0);
    m.set_transition(1, s, s + 1 == n ? s : s + 1, 1.0);
    m.set_transition(2, s, s, 1.0);
    for (std::size_t a = 0; a < 3; ++a) m.set_observation(a, s, s, 1.0);
  }
  m.set_reward(n - 1, 2, 1.0);
  return m;
}

/// One state, one action, one observation.
inline ropo::Pomdp trivial(double reward = 0.0, double gamma = 0.5) {
  ropo::Pomdp m(1, 1, 1, gamma);
  m.set_transition(0, 0, 0, 1.0);
  m.set_observation(0, 0, 0, 1.0);
  m.set_reward(0, 0, reward);
  return m;
}

}  // namespace fixture
