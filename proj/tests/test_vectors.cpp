#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ropo/vectors.hpp"

using namespace ropo;

namespace {

VectorSet random_set(std::mt19937_64& rng, std::size_t count, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorSet set;
  for (std::size_t i = 0; i < count; ++i) {
    ValueVector v;
    v.action = i % 3;
    for (std::size_t s = 0; s < n; ++s) v.values.push_back(u(rng));
    set.push_back(v);
  }
  return set;
}

std::vector<StateIndex> to_vector(const Region& r) {
  return {r.states().begin(), r.states().end()};
}

Region random_region(std::mt19937_64& rng, std::size_t n) {
  std::vector<StateIndex> states;
  for (StateIndex s = 0; s < n; ++s)
    if (rng() % 2 == 0) states.push_back(s);
  if (states.empty()) states.push_back(rng() % n);
  return Region(states);
}

}  // namespace

TEST_CASE("induced value") {
  CHECK(induced_value({}, Belief::uniform(3)) == 0.0);
  const ValueVector a{{1.0, 3.0}, 0};
  CHECK(induced_value({a}, Belief({0.5, 0.5})) == doctest::Approx(2.0));
  // (1,0) and (0,1) cross at b = (0.5, 0.5)
  const VectorSet pair{{{1.0, 0.0}, 0}, {{0.0, 1.0}, 1}};
  CHECK(induced_value(pair, Belief({0.5, 0.5})) == doctest::Approx(0.5));
}

TEST_CASE("cross sum") {
  const VectorSet x{{{1.0, 2.0}, 4}, {{3.0, 0.5}, 5}, {{0.0, 0.0}, 6}};
  const VectorSet zero{{{0.0, 0.0}, 1}};
  const VectorSet sum = cross_sum(zero, x);
  REQUIRE(sum.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sum[i].values == x[i].values);
    CHECK(sum[i].action == 1);
  }
  const VectorSet w{{{1.0, 1.0}, 0}, {{0.0, 2.0}, 1}};
  CHECK(cross_sum(w, x).size() == 6);

  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const VectorSet p = random_set(rng, 1 + rng() % 4, 3);
    const VectorSet q = random_set(rng, 1 + rng() % 4, 3);
    const VectorSet pq = cross_sum(p, q);
    for (int k = 0; k < 20; ++k) {
      const Belief b = oracle::random_belief(rng, 3);
      CHECK(induced_value(pq, b) == doctest::Approx(oracle::cross_sum_value({p, q}, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("dominate examples") {
  const Region full = Region::all(2);
  const auto strict = dominate({{1.0, 1.0}, 0}, {{{0.0, 0.0}, 0}}, full, 0.0);
  REQUIRE(strict);
  CHECK(oracle::value_of({1.0, 1.0}, *strict) == doctest::Approx(1.0));

  CHECK_FALSE(dominate({{0.0, 0.0}, 0}, {{{1.0, 1.0}, 0}}, full, 0.0));
  CHECK_FALSE(dominate({{0.0, 0.0}, 0}, {{{1.0, 1.0}, 0}}, Region({1}), 0.0));

  const auto corner = dominate({{1.0, 0.0}, 0}, {{{0.0, 1.0}, 0}}, full, 0.0);
  REQUIRE(corner);
  // grid search: the advantage b0 - b1 is largest at b0 = 1
  double best_b0 = 0.0, best_adv = -2.0;
  for (int i = 0; i <= 100; ++i) {
    const double b0 = i / 100.0;
    if (b0 - (1.0 - b0) > best_adv) {
      best_adv = b0 - (1.0 - b0);
      best_b0 = b0;
    }
  }
  CHECK((*corner)[0] == doctest::Approx(best_b0));

  const auto any = dominate({{0.0, 0.0, 0.0}, 0}, {}, Region({0, 2}), 0.0);
  REQUIRE(any);
  CHECK(*any == Belief({0.5, 0.0, 0.5}));
}

TEST_CASE("dominate is sound and, on small regions, complete") {
  std::mt19937_64 rng(8);
  int found = 0, refused = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 3;
    const Region r = random_region(rng, n);
    const VectorSet w = random_set(rng, 1 + rng() % 5, n);
    const ValueVector alpha = random_set(rng, 1, n)[0];
    const double eps = rep % 2 == 0 ? 0.0 : 0.05;
    const auto b = dominate(alpha, w, r, eps);
    if (b) {
      ++found;
      CHECK(oracle::value_of(alpha.values, *b) > oracle::max_value(w, *b) + eps - 1e-7);
      for (StateIndex s = 0; s < n; ++s)
        if (!r.contains(s)) CHECK((*b)[s] == 0.0);
    } else if (r.size() <= 3) {
      ++refused;
      const auto states = to_vector(r);
      for (const auto& local : oracle::simplex_grid(states.size(), 0.005)) {
        std::vector<double> p(n, 0.0);
        for (std::size_t k = 0; k < states.size(); ++k) p[states[k]] = local[k];
        double sum = 0.0;
        for (double v : p) sum += v;
        p[states[0]] += 1.0 - sum;
        if (p[states[0]] < 0.0) p[states[0]] = 0.0;
        const Belief g(p);
        CHECK(oracle::value_of(alpha.values, g) <= oracle::max_value(w, g) + eps + 1e-6);
      }
    }
  }
  CHECK(found > 20);
  CHECK(refused > 20);
}

TEST_CASE("max advantage matches a grid optimum") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 2 + rng() % 2;
    const VectorSet w = random_set(rng, 1 + rng() % 4, n);
    const ValueVector alpha = random_set(rng, 1, n)[0];
    const Witness wit = max_advantage(alpha, w, Region::all(n));
    double grid_best = -1e9;
    for (const auto& p : oracle::simplex_grid(n, 0.01)) {
      const Belief b(p);
      grid_best = std::max(grid_best, oracle::value_of(alpha.values, b) - oracle::max_value(w, b));
    }
    CHECK(wit.advantage >= grid_best - 1e-9);
    CHECK(wit.advantage <= grid_best + 0.02);
    CHECK(oracle::value_of(alpha.values, wit.belief) - oracle::max_value(w, wit.belief) ==
          doctest::Approx(wit.advantage).epsilon(1e-7));
  }
}

TEST_CASE("best picks the maximiser and breaks ties lexicographically") {
  const VectorSet one{{{0.3, 0.1}, 2}};
  CHECK(best(Belief({0.5, 0.5}), one, Region::all(2)).action == 2);

  // equal value 1 at b = (0.5, 0.5); (1.5, 0.5) is larger in state 0
  const VectorSet tie{{{0.5, 1.5}, 0}, {{1.5, 0.5}, 1}};
  CHECK(best(Belief({0.5, 0.5}), tie, Region::all(2)).action == 1);
  CHECK(best_index(Belief({0.5, 0.5}), tie, Region::all(2)) == 1);
  // restricted to {1} the larger component in state 1 wins
  CHECK(best(Belief({0.0, 1.0}), tie, Region({1})).action == 0);

  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const VectorSet w = random_set(rng, 1 + rng() % 6, 4);
    const Belief b = oracle::random_belief(rng, 4);
    std::size_t scan = 0;
    for (std::size_t i = 1; i < w.size(); ++i)
      if (oracle::value_of(w[i].values, b) > oracle::value_of(w[scan].values, b)) scan = i;
    CHECK(best_index(b, w, Region::all(4)) == scan);
  }
}

TEST_CASE("pointwise purge") {
  const Region full = Region::all(2);
  const VectorSet kept = pointwise_purge({{{1.0, 1.0}, 0}, {{0.0, 0.0}, 1}}, full);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].values == std::vector<double>{1.0, 1.0});
  CHECK(pointwise_purge({{{1.0, 0.0}, 0}, {{0.0, 1.0}, 1}}, full).size() == 2);

  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> small(0, 3);
  for (int rep = 0; rep < 200; ++rep) {
    VectorSet w;
    for (int i = 0; i < 8; ++i) w.push_back({{double(small(rng)), double(small(rng)), double(small(rng))}, 0});
    const Region r = random_region(rng, 3);
    const VectorSet out = pointwise_purge(w, r);
    for (const auto& v : w) {
      bool covered = false;
      for (const auto& u : out) {
        bool dominates = true;
        for (StateIndex s : r.states()) dominates = dominates && u.values[s] >= v.values[s];
        covered = covered || dominates;
      }
      CHECK(covered);
    }
    // no kept vector is covered by another kept one
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (i == j) continue;
        bool dominates = true;
        for (StateIndex s : r.states()) dominates = dominates && out[j].values[s] >= out[i].values[s];
        CHECK_FALSE(dominates);
      }
  }
}

TEST_CASE("purge examples") {
  const VectorSet parsimonious{{{1.0, 0.0}, 0}, {{0.0, 1.0}, 1}};
  CHECK(purge(parsimonious).size() == 2);
  const VectorSet extra{{{1.0, 0.0}, 0}, {{0.4, 0.4}, 2}, {{0.0, 1.0}, 1}};
  const VectorSet out = purge(extra);
  CHECK(out.size() == 2);
  for (const auto& v : out) CHECK(v.action != 2);
  CHECK(purge({}).empty());
  // duplicates collapse
  CHECK(purge({{{1.0, 2.0}, 0}, {{1.0, 2.0}, 1}}).size() == 1);
  // (0.4, 0.6) only matters outside region {0}
  CHECK(purge_region({{{1.0, 0.0}, 0}, {{0.4, 0.6}, 1}}, Region({0})).size() == 1);
}

TEST_CASE("purge preserves the induced function in the region") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng() % 3;
    const Region r = rep % 2 == 0 ? Region::all(n) : random_region(rng, n);
    const VectorSet w = random_set(rng, 1 + rng() % 12, n);
    const VectorSet out = purge_region(w, r);
    CHECK(out.size() <= w.size());
    const auto states = to_vector(r);
    for (int k = 0; k < 1000; ++k) {
      const Belief b = oracle::random_belief_in(rng, states, n);
      CHECK(std::abs(oracle::max_value(out, b) - oracle::max_value(w, b)) <= 1e-8);
    }
    const VectorSet again = purge_region(out, r);
    CHECK(again.size() == out.size());
  }
}

TEST_CASE("purge size does not depend on input order") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    VectorSet w = random_set(rng, 30, 3);
    const std::size_t size = purge(w).size();
    for (int k = 0; k < 5; ++k) {
      std::shuffle(w.begin(), w.end(), rng);
      CHECK(purge(w).size() == size);
    }
  }
}

TEST_CASE("purge with a tolerance covers to within it") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 50; ++rep) {
    const VectorSet w = random_set(rng, 20, 3);
    const double tol = 0.02;
    const VectorSet loose = purge(w, tol);
    const VectorSet exact = purge(w);
    CHECK(loose.size() <= exact.size());
    for (int k = 0; k < 500; ++k) {
      const Belief b = oracle::random_belief(rng, 3);
      const double gap = oracle::max_value(w, b) - oracle::max_value(loose, b);
      CHECK(gap >= -1e-12);
      // a dropped vector beat a subset of the result by at most tol
      CHECK(gap <= tol + 1e-8);
    }
  }
  CHECK_THROWS_AS(purge({{{1.0}, 0}}, -1.0), std::invalid_argument);
}
