#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ropo/pomdp.hpp"
#include "ropo/vectors.hpp"

namespace ropo {

/// Syntax error with a 1-based location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Shortest decimal text that reads back to the same double.
std::string format_real(double value);

/**
 * Model grammar (line comments start with '#'):
 *
 *   discount: <real>
 *   states: <n> | <name...>            (same for actions, observations)
 *   start: <|S| reals>                 (optional)
 *   T: <a> : <s> : <s'> <p>
 *   T: <a> : <s>    followed by |S| reals
 *   T: <a>          followed by |S| rows of |S| reals
 *   O: <a> : <s-> : <s'>  followed by |O| reals; '*' for s- means every s-
 *   R: <a> : <s> <real>
 *
 * Indices may be given by number or by name; '*' as an action means all.
 */
Pomdp parse_model(std::istream& in);
Pomdp parse_model(const std::string& text);

void serialize_model(std::ostream& out, const Pomdp& model);
std::string serialize_model(const Pomdp& model);

/// Value sets per region, as written by the solvers.
struct SolutionDocument {
  double discount = 0.0;
  std::size_t num_states = 0;
  std::size_t horizon = 0;
  double residual = 0.0;
  double reward_shift = 0.0;
  std::vector<Region> regions;
  std::vector<VectorSet> sets;

  bool operator==(const SolutionDocument&) const = default;
};

void write_solution(std::ostream& out, const SolutionDocument& doc);
std::string write_solution(const SolutionDocument& doc);
SolutionDocument read_solution(std::istream& in);
SolutionDocument read_solution(const std::string& text);

}  // namespace ropo
