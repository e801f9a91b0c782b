#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ropo/pomdp.hpp"

namespace ropo {

enum class Cell { kFree, kRoom, kBlocked };

/// Compass heading; turning left subtracts one modulo 4.
enum class Heading { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

struct CellPos {
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const CellPos&) const = default;
};

/// The boundary on one side of a cell.
struct Segment {
  CellPos cell;
  Heading side = Heading::kNorth;

  bool operator==(const Segment&) const = default;
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MazeLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Cell> cells;  // row-major
  std::vector<Segment> walls;
  std::vector<Segment> doorways;
  CellPos goal_cell;
  Heading goal_heading = Heading::kNorth;

  Cell at(std::size_t row, std::size_t col) const { return cells[row * cols + col]; }
  bool operator==(const MazeLayout&) const = default;
};

enum class ModelFlavor { kStandard, kNoisy };

/// What a sensor pointed in one direction can report, in observation-row order.
enum class Percept { kWall = 0, kOpen = 1, kDoorway = 2, kUndetermined = 3 };

inline constexpr ActionIndex kMoveForward = 0;
inline constexpr ActionIndex kTurnLeft = 1;
inline constexpr ActionIndex kTurnRight = 2;
inline constexpr ActionIndex kDeclareGoal = 3;

/// Outcome probabilities of one action: no change, one step, two steps.
struct MotionRow {
  double none;
  double once;
  double twice;
};

MotionRow forward_row(ModelFlavor flavor);
MotionRow turn_row(ModelFlavor flavor);

/// Distribution of one directional percept given the actual case (wall, open
/// or doorway), indexed by Percept.
std::array<double, 4> percept_row(ModelFlavor flavor, Percept actual);

/// Observation index of a (front, left, right) percept triple.
constexpr ObservationIndex encode_percepts(Percept front, Percept left, Percept right) {
  return static_cast<ObservationIndex>(front) * 16 + static_cast<ObservationIndex>(left) * 4 +
         static_cast<ObservationIndex>(right);
}

/// Throws LayoutError if the goal is blocked, the grid is malformed or the
/// open cells are not connected.
void validate_layout(const MazeLayout& layout);

/// Four states per open cell (row-major, headings N E S W), four actions
/// (move-forward, turn-left, turn-right, declare-goal), 64 observations.
Pomdp build_office_pomdp(const MazeLayout& layout, ModelFlavor flavor, double gamma);

/// State index of (cell, heading) in the model built from layout.
StateIndex office_state(const MazeLayout& layout, CellPos cell, Heading heading);
StateIndex office_goal_state(const MazeLayout& layout);

/// ASCII map: a header line "goal: N|E|S|W", then rows of '#' (blocked),
/// '.' (free), 'R' (room) and 'G' (the goal, a free cell). Boundaries
/// between a room cell and a non-room open cell become doorways.
MazeLayout parse_layout(std::istream& in);
MazeLayout parse_layout(const std::string& text);

/// "mini-A", "mini-B" and "office-70".
const std::map<std::string, std::string>& builtin_layout_maps();
MazeLayout builtin_layout(const std::string& name);

}  // namespace ropo
