#include "ropo/office_env.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace ropo {
namespace {

constexpr std::array<Heading, 4> kHeadings{Heading::kNorth, Heading::kEast, Heading::kSouth,
                                           Heading::kWest};
constexpr std::array<char, 4> kHeadingLetters{'N', 'E', 'S', 'W'};

Heading rotate(Heading h, int quarter_turns) {
  const int i = (static_cast<int>(h) + quarter_turns % 4 + 4) % 4;
  return kHeadings[static_cast<std::size_t>(i)];
}

Heading opposite(Heading h) { return rotate(h, 2); }

std::optional<CellPos> neighbour(const MazeLayout& layout, CellPos c, Heading h) {
  switch (h) {
    case Heading::kNorth:
      if (c.row == 0) return std::nullopt;
      return CellPos{c.row - 1, c.col};
    case Heading::kSouth:
      if (c.row + 1 >= layout.rows) return std::nullopt;
      return CellPos{c.row + 1, c.col};
    case Heading::kWest:
      if (c.col == 0) return std::nullopt;
      return CellPos{c.row, c.col - 1};
    case Heading::kEast:
      if (c.col + 1 >= layout.cols) return std::nullopt;
      return CellPos{c.row, c.col + 1};
  }
  return std::nullopt;
}

bool has_segment(const std::vector<Segment>& segments, const MazeLayout& layout, CellPos c,
                 Heading side) {
  const auto other = neighbour(layout, c, side);
  for (const Segment& seg : segments) {
    if (seg.cell == c && seg.side == side) return true;
    if (other && seg.cell == *other && seg.side == opposite(side)) return true;
  }
  return false;
}

/// The cell reached by one step, or nothing when the step is impossible.
std::optional<CellPos> step(const MazeLayout& layout, CellPos c, Heading h) {
  const auto next = neighbour(layout, c, h);
  if (!next || layout.at(next->row, next->col) == Cell::kBlocked) return std::nullopt;
  if (has_segment(layout.walls, layout, c, h)) return std::nullopt;
  return next;
}

Percept actual_case(const MazeLayout& layout, CellPos c, Heading h) {
  if (!step(layout, c, h)) return Percept::kWall;
  if (has_segment(layout.doorways, layout, c, h)) return Percept::kDoorway;
  return Percept::kOpen;
}

std::vector<std::size_t> open_cell_index(const MazeLayout& layout) {
  std::vector<std::size_t> index(layout.cells.size(), layout.cells.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < layout.cells.size(); ++i) {
    if (layout.cells[i] != Cell::kBlocked) index[i] = next++;
  }
  return index;
}

}  // namespace

MotionRow forward_row(ModelFlavor flavor) {
  if (flavor == ModelFlavor::kStandard) return {0.11, 0.88, 0.01};
  return {0.2, 0.7, 0.1};
}

MotionRow turn_row(ModelFlavor flavor) {
  if (flavor == ModelFlavor::kStandard) return {0.05, 0.9, 0.05};
  return {0.15, 0.7, 0.15};
}

std::array<double, 4> percept_row(ModelFlavor flavor, Percept actual) {
  const bool standard = flavor == ModelFlavor::kStandard;
  switch (actual) {
    case Percept::kWall:
      return standard ? std::array{0.90, 0.04, 0.04, 0.02} : std::array{0.70, 0.19, 0.09, 0.02};
    case Percept::kOpen:
      return standard ? std::array{0.02, 0.90, 0.06, 0.02} : std::array{0.19, 0.70, 0.09, 0.02};
    case Percept::kDoorway:
      return {0.15, 0.15, 0.69, 0.01};
    case Percept::kUndetermined:
      break;
  }
  throw std::invalid_argument("undetermined is not an actual case");
}

void validate_layout(const MazeLayout& layout) {
  if (layout.rows == 0 || layout.cols == 0) throw LayoutError("layout has no cells");
  if (layout.cells.size() != layout.rows * layout.cols) {
    throw LayoutError("cell grid does not match rows x cols");
  }
  if (layout.goal_cell.row >= layout.rows || layout.goal_cell.col >= layout.cols) {
    throw LayoutError("goal cell lies outside the grid");
  }
  if (layout.at(layout.goal_cell.row, layout.goal_cell.col) == Cell::kBlocked) {
    throw LayoutError("goal cell is blocked");
  }
  for (const auto* segments : {&layout.walls, &layout.doorways}) {
    for (const Segment& seg : *segments) {
      if (seg.cell.row >= layout.rows || seg.cell.col >= layout.cols) {
        throw LayoutError("segment lies outside the grid");
      }
    }
  }
  // Connectivity over open cells, ignoring walls (the robot may still be
  // unable to pass a wall segment, but every cell must belong to the maze).
  std::vector<bool> seen(layout.cells.size(), false);
  std::vector<CellPos> stack{layout.goal_cell};
  seen[layout.goal_cell.row * layout.cols + layout.goal_cell.col] = true;
  while (!stack.empty()) {
    const CellPos c = stack.back();
    stack.pop_back();
    for (Heading h : kHeadings) {
      const auto next = step(layout, c, h);
      if (!next) continue;
      const std::size_t i = next->row * layout.cols + next->col;
      if (!seen[i]) {
        seen[i] = true;
        stack.push_back(*next);
      }
    }
  }
  for (std::size_t i = 0; i < layout.cells.size(); ++i) {
    if (layout.cells[i] != Cell::kBlocked && !seen[i]) {
      throw LayoutError("cell (" + std::to_string(i / layout.cols) + ", " +
                        std::to_string(i % layout.cols) + ") is not reachable from the goal");
    }
  }
}

StateIndex office_state(const MazeLayout& layout, CellPos cell, Heading heading) {
  const auto index = open_cell_index(layout);
  const std::size_t i = index.at(cell.row * layout.cols + cell.col);
  if (i == layout.cells.size()) throw LayoutError("cell is blocked");
  return i * 4 + static_cast<std::size_t>(heading);
}

StateIndex office_goal_state(const MazeLayout& layout) {
  return office_state(layout, layout.goal_cell, layout.goal_heading);
}

Pomdp build_office_pomdp(const MazeLayout& layout, ModelFlavor flavor, double gamma) {
  validate_layout(layout);
  const auto index = open_cell_index(layout);
  std::vector<CellPos> open;
  for (std::size_t i = 0; i < layout.cells.size(); ++i) {
    if (layout.cells[i] != Cell::kBlocked) open.push_back({i / layout.cols, i % layout.cols});
  }
  const std::size_t n = open.size() * 4;
  Pomdp model(n, 4, 64, gamma);
  model.action_names = {"move-forward", "turn-left", "turn-right", "declare-goal"};
  const std::array<const char*, 4> percept_names{"wall", "open", "doorway", "undetermined"};
  for (std::size_t f = 0; f < 4; ++f) {
    for (std::size_t l = 0; l < 4; ++l) {
      for (std::size_t r = 0; r < 4; ++r) {
        model.observation_names.push_back(std::string(percept_names[f]) + "-" + percept_names[l] +
                                          "-" + percept_names[r]);
      }
    }
  }
  auto state_of = [&](CellPos c, Heading h) {
    return index[c.row * layout.cols + c.col] * 4 + static_cast<std::size_t>(h);
  };
  // Table entries have two decimals, so a folded sum is snapped back to the
  // double nearest its decimal value (0.2 + 0.7 + 0.1 is exactly 1).
  auto add = [&](ActionIndex a, StateIndex s, StateIndex s2, double p) {
    const double sum = model.transition(a, s, s2) + p;
    model.set_transition(a, s, s2, std::round(sum * 1e12) / 1e12);
  };

  const MotionRow fwd = forward_row(flavor);
  const MotionRow turn = turn_row(flavor);
  for (const CellPos& c : open) {
    for (Heading h : kHeadings) {
      const StateIndex s = state_of(c, h);
      model.state_names.push_back("r" + std::to_string(c.row) + "c" + std::to_string(c.col) +
                                  kHeadingLetters[static_cast<std::size_t>(h)]);

      // Blocked outcomes leave the robot in the last state it could reach.
      add(kMoveForward, s, s, fwd.none);
      const auto one = step(layout, c, h);
      const auto two = one ? step(layout, *one, h) : std::nullopt;
      add(kMoveForward, s, one ? state_of(*one, h) : s, fwd.once);
      add(kMoveForward, s, two ? state_of(*two, h) : (one ? state_of(*one, h) : s), fwd.twice);

      add(kTurnLeft, s, s, turn.none);
      add(kTurnLeft, s, state_of(c, rotate(h, -1)), turn.once);
      add(kTurnLeft, s, state_of(c, rotate(h, 2)), turn.twice);
      add(kTurnRight, s, s, turn.none);
      add(kTurnRight, s, state_of(c, rotate(h, 1)), turn.once);
      add(kTurnRight, s, state_of(c, rotate(h, 2)), turn.twice);

      add(kDeclareGoal, s, s, 1.0);

      const auto front = percept_row(flavor, actual_case(layout, c, h));
      const auto left = percept_row(flavor, actual_case(layout, c, rotate(h, -1)));
      const auto right = percept_row(flavor, actual_case(layout, c, rotate(h, 1)));
      for (std::size_t f = 0; f < 4; ++f) {
        for (std::size_t l = 0; l < 4; ++l) {
          for (std::size_t r = 0; r < 4; ++r) {
            const ObservationIndex o = f * 16 + l * 4 + r;
            for (ActionIndex a = 0; a < 4; ++a) {
              model.set_observation(a, s, o, front[f] * left[l] * right[r]);
            }
          }
        }
      }
    }
  }
  model.set_reward(office_goal_state(layout), kDeclareGoal, 1.0);
  validate(model);
  return model;
}

MazeLayout parse_layout(std::istream& in) {
  std::string line;
  std::optional<Heading> heading;
  std::vector<std::string> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!heading) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      std::istringstream header(line.substr(first));
      std::string key;
      std::string value;
      header >> key >> value;
      if (key != "goal:" || value.size() != 1) {
        throw LayoutError("line " + std::to_string(line_no) + ": expected 'goal: N|E|S|W'");
      }
      const auto* it = std::find(kHeadingLetters.begin(), kHeadingLetters.end(), value[0]);
      if (it == kHeadingLetters.end()) {
        throw LayoutError("line " + std::to_string(line_no) + ": unknown heading '" + value + "'");
      }
      heading = kHeadings[static_cast<std::size_t>(it - kHeadingLetters.begin())];
      continue;
    }
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (!heading) throw LayoutError("missing 'goal:' header");
  if (rows.empty()) throw LayoutError("map has no rows");

  MazeLayout layout;
  layout.rows = rows.size();
  layout.cols = rows.front().size();
  layout.goal_heading = *heading;
  bool goal_seen = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != layout.cols) {
      throw LayoutError("map row " + std::to_string(r) + " has length " +
                        std::to_string(rows[r].size()) + ", expected " +
                        std::to_string(layout.cols));
    }
    for (std::size_t c = 0; c < layout.cols; ++c) {
      switch (rows[r][c]) {
        case '#':
          layout.cells.push_back(Cell::kBlocked);
          break;
        case '.':
          layout.cells.push_back(Cell::kFree);
          break;
        case 'R':
          layout.cells.push_back(Cell::kRoom);
          break;
        case 'G':
          if (goal_seen) throw LayoutError("map has more than one goal");
          goal_seen = true;
          layout.goal_cell = {r, c};
          layout.cells.push_back(Cell::kFree);
          break;
        default:
          throw LayoutError("map row " + std::to_string(r) + " column " + std::to_string(c) +
                            ": unexpected character '" + std::string(1, rows[r][c]) + "'");
      }
    }
  }
  if (!goal_seen) throw LayoutError("map has no goal cell");
  // Doorways: east and south boundaries between a room and an open non-room cell.
  for (std::size_t r = 0; r < layout.rows; ++r) {
    for (std::size_t c = 0; c < layout.cols; ++c) {
      const Cell here = layout.at(r, c);
      if (here == Cell::kBlocked) continue;
      for (Heading h : {Heading::kEast, Heading::kSouth}) {
        const auto other = neighbour(layout, {r, c}, h);
        if (!other) continue;
        const Cell there = layout.at(other->row, other->col);
        if (there == Cell::kBlocked) continue;
        if ((here == Cell::kRoom) != (there == Cell::kRoom)) layout.doorways.push_back({{r, c}, h});
      }
    }
  }
  validate_layout(layout);
  return layout;
}

MazeLayout parse_layout(const std::string& text) {
  std::istringstream in(text);
  return parse_layout(in);
}

const std::map<std::string, std::string>& builtin_layout_maps() {
  static const std::map<std::string, std::string> maps{
      {"mini-A",
       "goal: E\n"
       "..#RR\n"
       ".G.RR\n"
       "#.#..\n"
       "...#.\n"},
      {"mini-B",
       "goal: N\n"
       "##G##\n"
       "#...#\n"
       "..#..\n"
       ".....\n"},
      {"office-70",
       "goal: E\n"
       "RRR#..........\n"
       "RRR..........#\n"
       "RRR#.##.###..#\n"
       "##.#.RR.RRR.RR\n"
       "...G.RR.RRR.RR\n"
       ".##...........\n"},
  };
  return maps;
}

MazeLayout builtin_layout(const std::string& name) {
  const auto& maps = builtin_layout_maps();
  const auto it = maps.find(name);
  if (it == maps.end()) throw LayoutError("unknown builtin layout '" + name + "'");
  return parse_layout(it->second);
}

}  // namespace ropo
