#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace disrc {

// Deterministic, seedable gridworlds with the familiar key/door and lava
// crossing layouts. Semantics follow the common gridworld conventions:
// seven discrete actions, partial egocentric observations, sparse terminal
// reward discounted by episode length.

enum class CellKind : std::uint8_t { Empty, Wall, LockedDoor, OpenDoor, Key, Goal, Lava };
enum class Color : std::uint8_t { Red = 0, Green, Blue, Purple, Yellow, Grey };

struct Cell {
  CellKind kind = CellKind::Empty;
  Color color = Color::Grey;
  bool operator==(const Cell&) const = default;
};

// integer codes 0..6 are part of the interface and never change
enum class Action : int {
  TurnLeft = 0,
  TurnRight = 1,
  Forward = 2,
  Pickup = 3,
  Drop = 4,
  Toggle = 5,
  Done = 6,
};
inline constexpr int kNumActions = 7;

// East/South/West/North; y grows downward
enum class Direction : int { East = 0, South = 1, West = 2, North = 3 };

inline constexpr int kViewSize = 7;
inline constexpr int kObsDim = kViewSize * kViewSize * 3;  // 147

// Flattened egocentric view; every component is normalized into [0, 1].
using Observation = std::vector<double>;

struct GridState {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;  // row-major: cells[y*width + x]
  int agent_x = 0;
  int agent_y = 0;
  Direction agent_dir = Direction::East;
  std::optional<Cell> carrying;  // keys only
  int step_count = 0;
  int max_steps = 0;
  bool terminated = false;
  bool truncated = false;

  Cell& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
  const Cell& at(int x, int y) const {
    return cells[static_cast<std::size_t>(y) * width + x];
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool done() const { return terminated || truncated; }

  bool operator==(const GridState&) const = default;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;  // raw environment reward
  bool terminated = false;
  bool truncated = false;
};

// Key-behind-a-locked-door task. A full-height wall at a seeded column splits
// the grid; the agent and a yellow key start in the left partition, the goal
// sits at (size-2, size-2). max_steps = 10*size^2.
GridState reset_doorkey(std::uint64_t seed, int size = 8);

// Lava-crossing task. The agent starts at (1,1) facing east, the goal is at
// (size-2, size-2). num_crossings full lava rivers (alternating vertical /
// horizontal, seeded even positions) each get one seeded gap, carved room by
// room so a safe path always exists. max_steps = 4*size^2.
GridState reset_lavacrossing(std::uint64_t seed, int size = 9, int num_crossings = 1);

// One environment transition. Throws std::logic_error when the episode is
// already finished. Reaching the goal yields 1 - 0.9*(step_count/max_steps);
// every other outcome (including lava and truncation) yields 0.
StepResult step(GridState& state, Action action);

// Egocentric 7x7 crop in front of the agent, rotated so facing is up, agent
// at bottom-center. Per cell three channels: object kind (scaled by 1/10),
// color (1/5) and door state (1/2); out-of-bounds cells read as grey walls.
// Flattened row-major: index = (row*7 + col)*3 + channel, row 0 farthest.
Observation observe(const GridState& state);

// One character per cell: '#' wall, '.' empty, 'K' key, 'G' goal, '~' lava,
// 'D' locked door, '_' open door; the agent renders as > v < ^.
std::string render_ascii(const GridState& state);

}  // namespace disrc
