#include "ropo/region_approx.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <tuple>

#include "detail.hpp"

namespace ropo {

RegionSystem::RegionSystem(std::vector<Region> regions, std::size_t num_states)
    : regions_(std::move(regions)), num_states_(num_states), containing_(num_states) {
  if (regions_.empty()) throw std::invalid_argument("a region system needs at least one region");
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    for (StateIndex s : regions_[i].states()) {
      if (s >= num_states) {
        throw std::invalid_argument("region " + std::to_string(i) + " names state " +
                                    std::to_string(s) + " outside the model");
      }
      containing_[s].push_back(i);
    }
  }
  for (StateIndex s = 0; s < num_states; ++s) {
    if (containing_[s].empty()) {
      throw std::invalid_argument("state " + std::to_string(s) + " is not covered by any region");
    }
  }
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    for (std::size_t j = 0; j < regions_.size(); ++j) {
      if (i != j && regions_[i].is_subset_of(regions_[j])) {
        throw std::invalid_argument("region " + std::to_string(i) + " is a subset of region " +
                                    std::to_string(j));
      }
    }
  }
}

std::vector<std::vector<StateIndex>> ideal_step(const Pomdp& model) {
  const std::size_t n = model.num_states();
  std::vector<std::vector<StateIndex>> next(n);
  for (StateIndex s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < model.num_actions(); ++a) {
      const auto row = model.transition_row(a, s);
      const double top = *std::max_element(row.begin(), row.end());
      for (StateIndex s2 = 0; s2 < n; ++s2) {
        if (row[s2] == top) next[s].push_back(s2);
      }
    }
    std::sort(next[s].begin(), next[s].end());
    next[s].erase(std::unique(next[s].begin(), next[s].end()), next[s].end());
  }
  return next;
}

RegionSystem radius_k_regions(const Pomdp& model, std::size_t k) {
  const std::size_t n = model.num_states();
  const auto step = ideal_step(model);
  std::vector<Region> balls;
  balls.reserve(n);
  std::vector<std::size_t> depth(n);
  for (StateIndex centre = 0; centre < n; ++centre) {
    std::fill(depth.begin(), depth.end(), std::numeric_limits<std::size_t>::max());
    std::vector<StateIndex> frontier{centre};
    std::vector<StateIndex> members{centre};
    depth[centre] = 0;
    for (std::size_t d = 1; d <= k && !frontier.empty(); ++d) {
      std::vector<StateIndex> next_frontier;
      for (StateIndex s : frontier) {
        for (StateIndex s2 : step[s]) {
          if (depth[s2] != std::numeric_limits<std::size_t>::max()) continue;
          depth[s2] = d;
          next_frontier.push_back(s2);
          members.push_back(s2);
        }
      }
      frontier = std::move(next_frontier);
    }
    balls.emplace_back(std::move(members));
  }
  // Remove, one after another, regions that are subsets of a remaining region.
  std::vector<bool> removed(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || removed[j]) continue;
      if (balls[i].size() <= balls[j].size() && balls[i].is_subset_of(balls[j])) {
        removed[i] = true;
        break;
      }
    }
  }
  std::vector<Region> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) kept.push_back(std::move(balls[i]));
  }
  return RegionSystem(std::move(kept), n);
}

double degree_of_support(std::span<const double> f, const Region& r) {
  double total = 0.0;
  for (double v : f) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("degree_of_support of a zero function");
  double inside = 0.0;
  for (StateIndex s : r.states()) inside += f[s];
  return inside / total;
}

template <class F>
std::size_t Ropomdp::choose_region(StateIndex s_true, F&& mass) const {
  std::size_t chosen = 0;
  double chosen_support = -1.0;
  for (std::size_t idx : regions_.containing(s_true)) {
    const double support = mass(regions_[idx]);
    if (support > chosen_support) {
      chosen = idx;
      chosen_support = support;
    }
  }
  return chosen;
}

Ropomdp::Ropomdp(Pomdp base, RegionSystem regions)
    : base_(std::move(base)), regions_(std::move(regions)) {
  if (regions_.num_states() != base_.num_states()) {
    throw std::invalid_argument("region system and model disagree on the number of states");
  }
  const std::size_t n = base_.num_states();
  const std::size_t num_actions = base_.num_actions();
  kernel_.resize(n * num_actions);
  std::vector<std::pair<StateIndex, double>> succ;
  std::vector<double> f;
  for (StateIndex s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < num_actions; ++a) {
      succ.clear();
      const auto row = base_.transition_row(a, s);
      for (StateIndex s2 = 0; s2 < n; ++s2) {
        if (row[s2] > 0.0) succ.emplace_back(s2, row[s2]);
      }
      auto& entries = kernel_[s * num_actions + a];
      for (ObservationIndex o = 0; o < base_.num_observations(); ++o) {
        f.assign(succ.size(), 0.0);
        for (std::size_t i = 0; i < succ.size(); ++i) {
          f[i] = succ[i].second * base_.observation(a, s, succ[i].first, o);
        }
        // Sum of P(., o | s, a) over a region, ascending state order.
        auto support = [&](const Region& r) {
          double total = 0.0;
          for (std::size_t i = 0; i < succ.size(); ++i) {
            if (f[i] != 0.0 && r.contains(succ[i].first)) total += f[i];
          }
          return total;
        };
        for (std::size_t i = 0; i < succ.size(); ++i) {
          if (f[i] == 0.0) continue;
          const std::size_t region = choose_region(succ[i].first, support);
          entries.push_back({{o, region}, succ[i].first, f[i]});
        }
      }
      std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        return std::tie(x.z, x.next) < std::tie(y.z, y.next);
      });
    }
  }
  feasible_.resize(regions_.size() * num_actions);
  for (std::size_t idx = 0; idx < regions_.size(); ++idx) {
    for (ActionIndex a = 0; a < num_actions; ++a) {
      feasible_[idx * num_actions + a] = feasible_observations(a, regions_[idx]);
    }
  }
}

std::size_t Ropomdp::oracle_region(StateIndex s_true, ObservationIndex o, StateIndex s_prev,
                                   ActionIndex a_prev) const {
  auto support = [&](const Region& r) {
    double total = 0.0;
    for (StateIndex y : r.states()) {
      const double p = ropo::joint_prob(base_, s_prev, a_prev, y, o);
      if (p != 0.0) total += p;
    }
    return total;
  };
  return choose_region(s_true, support);
}

double Ropomdp::transformed_obs_prob(StateIndex s_next, ActionIndex a, StateIndex s_prev,
                                     RegionalObservation z) const {
  if (oracle_region(s_next, z.observation, s_prev, a) != z.region) return 0.0;
  return base_.observation(a, s_prev, s_next, z.observation);
}

double Ropomdp::joint_prob(StateIndex s, ActionIndex a, StateIndex s_next,
                           RegionalObservation z) const {
  const double t = base_.transition(a, s, s_next);
  if (t == 0.0) return 0.0;
  return t * transformed_obs_prob(s_next, a, s, z);
}

std::vector<RegionalObservation> Ropomdp::feasible_observations(ActionIndex a,
                                                                const Region& r) const {
  std::vector<RegionalObservation> zs;
  for (StateIndex s : r.states()) {
    for (const RegionalTransition& e : kernel(s, a)) zs.push_back(e.z);
  }
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  return zs;
}

namespace {

const VectorSet& non_empty(const VectorSet& set, const VectorSet& zero) {
  return set.empty() ? zero : set;
}

struct Contribution {
  std::size_t local;  // position of s in the region
  StateIndex next;
  double prob;
};

// Groups the kernel entries of r under action a by regional observation.
std::vector<std::vector<Contribution>> group_by_observation(
    const Ropomdp& rop, const Region& r, ActionIndex a,
    std::span<const RegionalObservation> zs) {
  std::vector<std::vector<Contribution>> grouped(zs.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    for (const RegionalTransition& e : rop.kernel(r[k], a)) {
      const auto it = std::lower_bound(zs.begin(), zs.end(), e.z);
      grouped[static_cast<std::size_t>(it - zs.begin())].push_back({k, e.next, e.prob});
    }
  }
  return grouped;
}

// Q-set for one regional observation, in region-local coordinates.
VectorSet local_q_set(const VectorSet& source, std::span<const Contribution> contributions,
                      std::size_t dim, double gamma) {
  VectorSet q;
  q.reserve(source.size());
  for (const ValueVector& alpha : source) {
    std::vector<double> beta(dim, 0.0);
    for (const Contribution& c : contributions) beta[c.local] += alpha.values[c.next] * c.prob;
    for (double& v : beta) v *= gamma;
    q.push_back(ValueVector{std::move(beta), kNoAction});
  }
  return q;
}

VectorSet update_region(const Ropomdp& rop, const Region& r,
                        const std::vector<std::vector<RegionalObservation>>& zs_by_action,
                        const RegionalValueSets& prev, double reward_offset,
                        double tolerance) {
  const Pomdp& model = rop.base();
  const std::size_t n = model.num_states();
  const std::size_t dim = r.size();
  const VectorSet zero{ValueVector{std::vector<double>(n, 0.0), kNoAction}};

  VectorSet candidates;
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    const auto& zs = zs_by_action[a];
    const auto grouped = group_by_observation(rop, r, a, zs);
    // restricted incremental pruning
    VectorSet w{ValueVector{std::vector<double>(dim, 0.0), kNoAction}};
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const VectorSet& source = non_empty(prev.sets[zs[i].region], zero);
      VectorSet q = local_q_set(source, grouped[i], dim, model.discount());
      if (q.size() > 1) q = purge(q, tolerance);
      if (i == 0) {
        w = std::move(q);
      } else if (q.size() == 1) {
        // A parsimonious set shifted by one vector stays parsimonious.
        for (ValueVector& v : w) {
          for (std::size_t k = 0; k < dim; ++k) v.values[k] += q.front().values[k];
        }
      } else {
        w = purge(cross_sum(w, q), tolerance);
      }
    }
    for (ValueVector& v : w) {
      for (std::size_t k = 0; k < dim; ++k) {
        v.values[k] = (model.reward(r[k], a) + reward_offset) + v.values[k];
      }
      v.action = a;
      candidates.push_back(std::move(v));
    }
  }
  VectorSet kept = purge(candidates, tolerance);
  VectorSet out;
  out.reserve(kept.size());
  for (ValueVector& v : kept) {
    ValueVector dense{std::vector<double>(n, 0.0), v.action};
    for (std::size_t k = 0; k < dim; ++k) dense.values[r[k]] = v.values[k];
    out.push_back(std::move(dense));
  }
  return out;
}

std::vector<std::vector<RegionalObservation>> feasible_by_action(const Ropomdp& rop,
                                                                 const Region& r) {
  std::vector<std::vector<RegionalObservation>> zs(rop.base().num_actions());
  for (ActionIndex a = 0; a < zs.size(); ++a) zs[a] = rop.feasible_observations(a, r);
  return zs;
}

std::vector<std::vector<RegionalObservation>> feasible_by_action(const Ropomdp& rop,
                                                                 std::size_t region) {
  std::vector<std::vector<RegionalObservation>> zs(rop.base().num_actions());
  for (ActionIndex a = 0; a < zs.size(); ++a) {
    const auto cached = rop.feasible_observations(a, region);
    zs[a].assign(cached.begin(), cached.end());
  }
  return zs;
}

template <class Fn>
void for_each_index(std::size_t count, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  const std::size_t threads = std::min(jobs, count);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

VectorSet regional_q_set(const Ropomdp& rop, const RegionalValueSets& prev, ActionIndex a,
                         RegionalObservation z, const Region& r) {
  const std::size_t n = rop.base().num_states();
  const VectorSet zero{ValueVector{std::vector<double>(n, 0.0), kNoAction}};
  const VectorSet& source = non_empty(prev.sets.at(z.region), zero);
  std::vector<Contribution> contributions;
  for (std::size_t k = 0; k < r.size(); ++k) {
    for (const RegionalTransition& e : rop.kernel(r[k], a)) {
      if (e.z == z) contributions.push_back({k, e.next, e.prob});
    }
  }
  VectorSet local = local_q_set(source, contributions, r.size(), rop.base().discount());
  VectorSet out;
  for (ValueVector& v : local) {
    ValueVector dense{std::vector<double>(n, 0.0), kNoAction};
    for (std::size_t k = 0; k < r.size(); ++k) dense.values[r[k]] = v.values[k];
    out.push_back(std::move(dense));
  }
  return out;
}

VectorSet ropomdp_update(const Ropomdp& rop, const Region& r, const RegionalValueSets& prev,
                         double prune_tolerance) {
  return update_region(rop, r, feasible_by_action(rop, r), prev, 0.0, prune_tolerance);
}

VectorSet ropomdp_update(const Ropomdp& rop, std::size_t region, const RegionalValueSets& prev,
                         double prune_tolerance) {
  return update_region(rop, rop.regions()[region], feasible_by_action(rop, region), prev, 0.0,
                       prune_tolerance);
}

bool ropomdp_stop(const RegionSystem& regions, const RegionalValueSets& curr,
                  const RegionalValueSets& prev, double eps, bool rewards_nonnegative) {
  if (curr.sets.size() != regions.size() || prev.sets.size() != regions.size()) {
    throw std::invalid_argument("value sets do not match the region system");
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& r = regions[i];
    if (!rewards_nonnegative) {
      for (const ValueVector& alpha : prev.sets[i]) {
        if (dominate(alpha, curr.sets[i], r, eps)) return false;
      }
    }
    for (const ValueVector& alpha : curr.sets[i]) {
      if (dominate(alpha, prev.sets[i], r, eps)) return false;
    }
  }
  return true;
}

RegionalSolveReport solve_ropomdp(const Ropomdp& rop, const RegionalSolveOptions& options) {
  if (!(options.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (options.prune_tolerance < 0.0) throw std::invalid_argument("prune tolerance must be >= 0");
  using Clock = std::chrono::steady_clock;
  const Pomdp& model = rop.base();
  const RegionSystem& regions = rop.regions();
  const std::size_t n = model.num_states();

  RegionalSolveReport report;
  report.reward_shift = std::max(0.0, -model.min_reward());

  std::vector<std::vector<std::vector<RegionalObservation>>> zs(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) zs[i] = feasible_by_action(rop, i);

  RegionalValueSets current;
  current.sets.assign(regions.size(), VectorSet{ValueVector{std::vector<double>(n, 0.0), kNoAction}});
  bool converged = false;
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    const auto started = Clock::now();
    RegionalValueSets next;
    next.sets.resize(regions.size());
    for_each_index(regions.size(), options.jobs, [&](std::size_t i) {
      next.sets[i] = update_region(rop, regions[i], zs[i], current, report.reward_shift,
                                   options.prune_tolerance);
    });
    const bool stop = ropomdp_stop(regions, next, current, options.eps, true);
    std::size_t total = 0;
    for (const VectorSet& s : next.sets) total += s.size();
    report.history.push_back(
        {total, 0.0, std::chrono::duration<double>(Clock::now() - started).count()});
    current = std::move(next);
    report.iterations = t;
    if (stop) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw IterationCapExceeded("restricted value iteration did not converge within " +
                               std::to_string(options.max_iterations) + " iterations");
  }
  if (report.reward_shift > 0.0) {
    // The t-step values carry the shift once per step: c * (1 - gamma^t) / (1 - gamma).
    const double gamma = model.discount();
    const double offset = report.reward_shift *
                          (1.0 - std::pow(gamma, static_cast<double>(report.iterations))) /
                          (1.0 - gamma);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      for (ValueVector& v : current.sets[i]) {
        for (StateIndex s : regions[i].states()) v.values[s] -= offset;
      }
    }
  }
  report.values = std::move(current);
  return report;
}

double regional_value(const RegionSystem& regions, const RegionalValueSets& values,
                      const Belief& b) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    bool supports = true;
    for (StateIndex s = 0; s < b.size() && supports; ++s) {
      if (b[s] > 0.0 && !regions[i].contains(s)) supports = false;
    }
    if (supports) return induced_value(values.sets[i], b);
  }
  throw std::invalid_argument("no region fully supports the belief");
}

ActionIndex approx_action(const Ropomdp& rop, const RegionalValueSets& values, const Belief& b) {
  const Pomdp& model = rop.base();
  const std::size_t n = model.num_states();
  const std::size_t num_regions = rop.regions().size();
  std::vector<std::vector<std::pair<StateIndex, double>>> buckets(rop.num_regional_observations());
  std::vector<std::size_t> touched;
  ActionIndex chosen = 0;
  double chosen_value = 0.0;
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    touched.clear();
    for (StateIndex s = 0; s < n; ++s) {
      const double weight = b[s];
      if (weight == 0.0) continue;
      for (const RegionalTransition& e : rop.kernel(s, a)) {
        const std::size_t id = e.z.observation * num_regions + e.z.region;
        if (buckets[id].empty()) touched.push_back(id);
        buckets[id].emplace_back(e.next, weight * e.prob);
      }
    }
    std::sort(touched.begin(), touched.end());
    double future = 0.0;
    for (std::size_t id : touched) {
      const VectorSet& set = values.sets[id % num_regions];
      if (!set.empty()) {
        double top = -std::numeric_limits<double>::infinity();
        for (const ValueVector& alpha : set) {
          double v = 0.0;
          for (const auto& [next, mass] : buckets[id]) v += alpha.values[next] * mass;
          top = std::max(top, v);
        }
        future += top;
      }
      buckets[id].clear();
    }
    const double q = expected_reward(model, b, a) + model.discount() * future;
    if (a == 0 || detail::improves_on(q, chosen_value)) {
      chosen = a;
      chosen_value = q;
    }
  }
  return chosen;
}

Belief regional_belief_update(const Ropomdp& rop, const Belief& b, ActionIndex a,
                              RegionalObservation z) {
  const std::size_t n = rop.base().num_states();
  std::vector<double> next(n, 0.0);
  for (StateIndex s = 0; s < n; ++s) {
    const double weight = b[s];
    if (weight == 0.0) continue;
    const auto entries = rop.kernel(s, a);
    auto it = std::lower_bound(entries.begin(), entries.end(), z,
                               [](const RegionalTransition& e, const RegionalObservation& key) {
                                 return e.z < key;
                               });
    for (; it != entries.end() && it->z == z; ++it) next[it->next] += weight * it->prob;
  }
  double total = 0.0;
  for (double v : next) total += v;
  if (total <= 0.0) {
    throw ZeroProbabilityObservation("regional observation has zero probability");
  }
  for (double& v : next) v /= total;
  return Belief(std::move(next));
}

}  // namespace ropo
