#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ropo/pomdp.hpp"

namespace ropo {

/// A state value function (alpha vector) tagged with the first action of the
/// policy tree it summarises.
struct ValueVector {
  std::vector<double> values;
  ActionIndex action = kNoAction;

  bool operator==(const ValueVector&) const = default;
};

using VectorSet = std::vector<ValueVector>;

/// Non-empty sorted set of state indices.
class Region {
 public:
  explicit Region(std::vector<StateIndex> states);
  static Region all(std::size_t num_states);

  std::span<const StateIndex> states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  StateIndex operator[](std::size_t k) const { return states_[k]; }
  bool contains(StateIndex s) const;
  bool is_subset_of(const Region& other) const;

  bool operator==(const Region&) const = default;

 private:
  std::vector<StateIndex> states_;
};

/**
 * Numerical slack for the domination LP. A witness is only accepted when its
 * advantage exceeds eps by more than this, so vectors that differ from the
 * current envelope by round-off are treated as dominated.
 */
inline constexpr double kDominanceTolerance = 1e-9;

double dot(std::span<const double> values, const Belief& b);

/// max over the set of alpha . b; 0 for the empty set.
double induced_value(const VectorSet& set, const Belief& b);

/// {alpha + beta}; tags come from w.
VectorSet cross_sum(const VectorSet& w, const VectorSet& x);

struct Witness {
  double advantage = 0.0;
  Belief belief;
};

/**
 * Solves max_{b in B_r} min_{beta in w} (alpha - beta) . b and returns the
 * optimum with its maximiser (zero outside r). w must be non-empty.
 */
Witness max_advantage(const ValueVector& alpha, const VectorSet& w, const Region& r);

/// A belief in B_r where alpha beats w by more than eps, or nothing.
/// For empty w this is the uniform belief over r.
std::optional<Belief> dominate(const ValueVector& alpha, const VectorSet& w, const Region& r,
                               double eps);

/// Index of the member of w with the largest value at b over r; ties go to the
/// lexicographically largest vector under ascending state order in r.
std::size_t best_index(const Belief& b, const VectorSet& w, const Region& r);
const ValueVector& best(const Belief& b, const VectorSet& w, const Region& r);

/// Minimal subset that pointwise-dominates every member of w on r (first kept on ties).
VectorSet pointwise_purge(const VectorSet& w, const Region& r);

/**
 * Parsimonious covering of w in region r (Lark-style filtering).
 * A positive tolerance also drops vectors that improve on the kept ones by at
 * most that much anywhere in B_r, so the result covers w only to within it.
 */
VectorSet purge_region(const VectorSet& w, const Region& r, double tolerance = 0.0);

/// purge_region over all states.
VectorSet purge(const VectorSet& w, double tolerance = 0.0);

}  // namespace ropo
