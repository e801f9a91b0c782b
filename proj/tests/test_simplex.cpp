#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ropo/simplex.hpp"

using namespace ropo;

TEST_CASE("one variable") {
  LinearProgram lp;
  lp.objective = {1.0};
  lp.constraints = {{{1.0}, Relation::kLessEqual, 1.0}};
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.optimum == doctest::Approx(1.0));
  CHECK(sol.assignment[0] == doctest::Approx(1.0));

  lp.constraints = {{{1.0}, Relation::kLessEqual, -1.0}};
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);

  lp.constraints = {{{1.0}, Relation::kGreaterEqual, 1.0}};
  CHECK(solve_lp(lp).status == LpStatus::kUnbounded);
}

TEST_CASE("two variables") {
  LinearProgram lp;
  lp.objective = {1.0, 1.0};
  lp.constraints = {{{1.0, 1.0}, Relation::kLessEqual, 2.0}, {{1.0, 0.0}, Relation::kLessEqual, 1.5}};
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.optimum == doctest::Approx(2.0));
}

TEST_CASE("equality rows and free variables") {
  // x free in [-3, 3], y >= 0, x + y = 1
  LinearProgram lp;
  lp.objective = {1.0, -1.0};
  lp.free = {true, false};
  lp.constraints = {{{1.0, 1.0}, Relation::kEqual, 1.0},
                    {{1.0, 0.0}, Relation::kLessEqual, 3.0},
                    {{1.0, 0.0}, Relation::kGreaterEqual, -3.0}};
  const LpSolution high = solve_lp(lp);
  REQUIRE(high.status == LpStatus::kOptimal);
  CHECK(high.optimum == doctest::Approx(1.0));
  CHECK(high.assignment[0] == doctest::Approx(1.0));
  CHECK(high.assignment[1] == doctest::Approx(0.0));

  lp.objective = {-1.0, 0.0};
  const LpSolution low = solve_lp(lp);
  REQUIRE(low.status == LpStatus::kOptimal);
  CHECK(low.optimum == doctest::Approx(3.0));
  CHECK(low.assignment[0] == doctest::Approx(-3.0));
  CHECK(low.assignment[1] == doctest::Approx(4.0));
}

TEST_CASE("random bounded LPs agree with vertex enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> rhs(-2.0, 10.0);
  int optimal = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng() % 6;
    const std::size_t m = 1 + rng() % 8;
    LinearProgram lp;
    for (std::size_t j = 0; j < n; ++j) lp.objective.push_back(coef(rng));
    for (std::size_t i = 0; i < m; ++i) {
      Constraint c;
      for (std::size_t j = 0; j < n; ++j) c.coefficients.push_back(coef(rng));
      c.relation = rng() % 4 == 0 ? Relation::kGreaterEqual : Relation::kLessEqual;
      c.rhs = rhs(rng);
      lp.constraints.push_back(c);
    }
    // the box keeps every problem bounded
    for (std::size_t j = 0; j < n; ++j) {
      Constraint c;
      c.coefficients.assign(n, 0.0);
      c.coefficients[j] = 1.0;
      c.rhs = 10.0;
      lp.constraints.push_back(c);
    }
    const auto expected = oracle::lp_vertex_optimum(lp);
    const LpSolution sol = solve_lp(lp);
    if (!expected) {
      CHECK(sol.status == LpStatus::kInfeasible);
      continue;
    }
    ++optimal;
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(std::abs(sol.optimum - *expected) <= 1e-5);
    double value = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(sol.assignment[j] >= -1e-7);
      value += lp.objective[j] * sol.assignment[j];
    }
    CHECK(std::abs(value - sol.optimum) <= 1e-7);
    for (const auto& c : lp.constraints) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += c.coefficients[j] * sol.assignment[j];
      if (c.relation == Relation::kLessEqual) CHECK(lhs <= c.rhs + 1e-7);
      else CHECK(lhs >= c.rhs - 1e-7);
    }
  }
  // enough of the sample must be feasible for the comparison to mean something
  CHECK(optimal > 300);
}

TEST_CASE("identical input gives identical bits") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  LinearProgram lp;
  lp.objective = {coef(rng), coef(rng), coef(rng)};
  for (int i = 0; i < 5; ++i)
    lp.constraints.push_back({{coef(rng), coef(rng), coef(rng)}, Relation::kLessEqual, 1.0});
  const LpSolution a = solve_lp(lp);
  const LpSolution b = solve_lp(lp);
  CHECK(a.status == b.status);
  CHECK(a.optimum == b.optimum);
  CHECK(a.assignment == b.assignment);
}
