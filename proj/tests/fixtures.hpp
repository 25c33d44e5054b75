#pragma once

// Hand-built grid fixtures for environment tests. The legend mirrors
// render_ascii: '#' wall, '.' empty, 'K' yellow key, 'G' goal, '~' lava,
// 'D' locked yellow door, '_' open door, and one of > v < ^ for the agent.

#include <stdexcept>
#include <string>
#include <vector>

#include "disrc/gridworld.hpp"

inline disrc::GridState make_grid(const std::vector<std::string>& rows,
                                  int max_steps = 100) {
  using namespace disrc;
  GridState s;
  s.height = static_cast<int>(rows.size());
  s.width = static_cast<int>(rows.front().size());
  s.cells.assign(static_cast<std::size_t>(s.width) * s.height, Cell{});
  s.max_steps = max_steps;
  bool agent_seen = false;
  for (int y = 0; y < s.height; ++y) {
    if (static_cast<int>(rows[y].size()) != s.width)
      throw std::invalid_argument("make_grid: ragged rows");
    for (int x = 0; x < s.width; ++x) {
      Cell c{};
      switch (rows[y][x]) {
        case '#': c = {CellKind::Wall, Color::Grey}; break;
        case '.': c = {CellKind::Empty, Color::Grey}; break;
        case 'K': c = {CellKind::Key, Color::Yellow}; break;
        case 'G': c = {CellKind::Goal, Color::Green}; break;
        case '~': c = {CellKind::Lava, Color::Red}; break;
        case 'D': c = {CellKind::LockedDoor, Color::Yellow}; break;
        case '_': c = {CellKind::OpenDoor, Color::Yellow}; break;
        case '>':
        case 'v':
        case '<':
        case '^': {
          static const std::string dirs = ">v<^";
          s.agent_x = x;
          s.agent_y = y;
          s.agent_dir = static_cast<Direction>(dirs.find(rows[y][x]));
          agent_seen = true;
          break;
        }
        default:
          throw std::invalid_argument("make_grid: unknown cell char");
      }
      s.at(x, y) = c;
    }
  }
  if (!agent_seen) throw std::invalid_argument("make_grid: no agent");
  return s;
}
