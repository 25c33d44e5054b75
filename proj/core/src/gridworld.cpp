#include "disrc/gridworld.hpp"

#include <algorithm>
#include <stdexcept>

#include "disrc/rng.hpp"

namespace disrc {

namespace {

constexpr int kDirDx[4] = {1, 0, -1, 0};  // E, S, W, N
constexpr int kDirDy[4] = {0, 1, 0, -1};

bool can_overlap(CellKind k) {
  return k == CellKind::Empty || k == CellKind::OpenDoor || k == CellKind::Goal ||
         k == CellKind::Lava;
}

GridState make_walled_grid(int size) {
  GridState s;
  s.width = size;
  s.height = size;
  s.cells.assign(static_cast<std::size_t>(size) * size, Cell{});
  for (int x = 0; x < size; ++x) {
    s.at(x, 0) = {CellKind::Wall, Color::Grey};
    s.at(x, size - 1) = {CellKind::Wall, Color::Grey};
  }
  for (int y = 0; y < size; ++y) {
    s.at(0, y) = {CellKind::Wall, Color::Grey};
    s.at(size - 1, y) = {CellKind::Wall, Color::Grey};
  }
  return s;
}

}  // namespace

GridState reset_doorkey(std::uint64_t seed, int size) {
  if (size < 5) throw std::invalid_argument("reset_doorkey: size must be >= 5");
  Rng rng(seed);
  GridState s = make_walled_grid(size);
  s.max_steps = 10 * size * size;
  s.at(size - 2, size - 2) = {CellKind::Goal, Color::Green};

  // interior wall column in [2, size-3], with one locked yellow door
  const int wall_col = 2 + rng.below_int(size - 4);
  for (int y = 0; y < size; ++y) s.at(wall_col, y) = {CellKind::Wall, Color::Grey};
  const int door_row = 1 + rng.below_int(size - 2);
  s.at(wall_col, door_row) = {CellKind::LockedDoor, Color::Yellow};

  auto random_left_cell = [&] {
    const int x = 1 + rng.below_int(wall_col - 1);
    const int y = 1 + rng.below_int(size - 2);
    return std::pair{x, y};
  };
  auto [kx, ky] = random_left_cell();
  s.at(kx, ky) = {CellKind::Key, Color::Yellow};
  for (;;) {
    auto [ax, ay] = random_left_cell();
    if (s.at(ax, ay).kind == CellKind::Empty) {
      s.agent_x = ax;
      s.agent_y = ay;
      break;
    }
  }
  s.agent_dir = static_cast<Direction>(rng.below_int(4));
  return s;
}

GridState reset_lavacrossing(std::uint64_t seed, int size, int num_crossings) {
  if (size < 5) throw std::invalid_argument("reset_lavacrossing: size must be >= 5");
  if (num_crossings < 1)
    throw std::invalid_argument("reset_lavacrossing: num_crossings must be >= 1");

  // river candidates sit on even positions so they never touch the borders,
  // the start or the goal
  std::vector<int> cands;
  for (int p = 2; p <= size - 3; p += 2) cands.push_back(p);
  const int want_v = (num_crossings + 1) / 2;  // rivers alternate, vertical first
  const int want_h = num_crossings / 2;
  if (want_v > static_cast<int>(cands.size()) || want_h > static_cast<int>(cands.size()))
    throw std::invalid_argument("reset_lavacrossing: too many crossings for this size");

  Rng rng(seed);
  GridState s = make_walled_grid(size);
  s.max_steps = 4 * size * size;
  s.agent_x = 1;
  s.agent_y = 1;
  s.agent_dir = Direction::East;
  s.at(size - 2, size - 2) = {CellKind::Goal, Color::Green};

  auto draw_positions = [&](int want) {
    std::vector<int> pool = cands;
    std::vector<int> out;
    for (int i = 0; i < want; ++i) {
      const int j = rng.below_int(static_cast<int>(pool.size()));
      out.push_back(pool[j]);
      pool.erase(pool.begin() + j);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const std::vector<int> rivers_v = draw_positions(want_v);
  const std::vector<int> rivers_h = draw_positions(want_h);

  for (int x : rivers_v)
    for (int y = 1; y <= size - 2; ++y) s.at(x, y) = {CellKind::Lava, Color::Red};
  for (int y : rivers_h)
    for (int x = 1; x <= size - 2; ++x) s.at(x, y) = {CellKind::Lava, Color::Red};

  // carve one gap per river, walking rooms towards the goal so the openings
  // chain into a guaranteed safe path
  std::vector<int> limits_v{0};
  limits_v.insert(limits_v.end(), rivers_v.begin(), rivers_v.end());
  limits_v.push_back(size - 1);
  std::vector<int> limits_h{0};
  limits_h.insert(limits_h.end(), rivers_h.begin(), rivers_h.end());
  limits_h.push_back(size - 1);

  std::vector<char> path(rivers_v.size(), 'v');
  path.insert(path.end(), rivers_h.size(), 'h');
  for (std::size_t i = path.size(); i > 1; --i)
    std::swap(path[i - 1], path[rng.below(static_cast<std::uint64_t>(i))]);

  int room_i = 0, room_j = 0;
  for (char move : path) {
    if (move == 'v') {  // cross the next vertical river
      const int x = limits_v[room_i + 1];
      const int lo = limits_h[room_j] + 1;
      const int hi = limits_h[room_j + 1] - 1;
      const int y = lo + rng.below_int(hi - lo + 1);
      s.at(x, y) = Cell{};
      ++room_i;
    } else {  // cross the next horizontal river
      const int y = limits_h[room_j + 1];
      const int lo = limits_v[room_i] + 1;
      const int hi = limits_v[room_i + 1] - 1;
      const int x = lo + rng.below_int(hi - lo + 1);
      s.at(x, y) = Cell{};
      ++room_j;
    }
  }
  return s;
}

StepResult step(GridState& s, Action action) {
  if (s.done()) throw std::logic_error("step: episode already finished");
  s.step_count += 1;

  double reward = 0.0;
  const int dir = static_cast<int>(s.agent_dir);
  const int fx = s.agent_x + kDirDx[dir];
  const int fy = s.agent_y + kDirDy[dir];
  const Cell fwd = s.in_bounds(fx, fy) ? s.at(fx, fy) : Cell{CellKind::Wall, Color::Grey};

  switch (action) {
    case Action::TurnLeft:
      s.agent_dir = static_cast<Direction>((dir + 3) % 4);
      break;
    case Action::TurnRight:
      s.agent_dir = static_cast<Direction>((dir + 1) % 4);
      break;
    case Action::Forward:
      if (can_overlap(fwd.kind)) {
        s.agent_x = fx;
        s.agent_y = fy;
        if (fwd.kind == CellKind::Goal) {
          s.terminated = true;
          reward = 1.0 - 0.9 * (static_cast<double>(s.step_count) / s.max_steps);
        } else if (fwd.kind == CellKind::Lava) {
          s.terminated = true;
        }
      }
      break;
    case Action::Pickup:
      if (fwd.kind == CellKind::Key && !s.carrying) {
        s.carrying = fwd;
        s.at(fx, fy) = Cell{};
      }
      break;
    case Action::Drop:
      if (fwd.kind == CellKind::Empty && s.carrying && s.in_bounds(fx, fy)) {
        s.at(fx, fy) = *s.carrying;
        s.carrying.reset();
      }
      break;
    case Action::Toggle:
      // a locked door opens when the carried key matches its color; open
      // doors stay open (this model has no closed-unlocked door state)
      if (fwd.kind == CellKind::LockedDoor && s.carrying &&
          s.carrying->kind == CellKind::Key && s.carrying->color == fwd.color) {
        s.at(fx, fy).kind = CellKind::OpenDoor;
      }
      break;
    case Action::Done:
      break;
    default:
      throw std::invalid_argument("step: unknown action");
  }

  if (s.step_count >= s.max_steps) s.truncated = true;
  return StepResult{observe(s), reward, s.terminated, s.truncated};
}

namespace {

int object_index(CellKind k) {
  switch (k) {
    case CellKind::Empty: return 1;
    case CellKind::Wall: return 2;
    case CellKind::LockedDoor:
    case CellKind::OpenDoor: return 4;
    case CellKind::Key: return 5;
    case CellKind::Goal: return 8;
    case CellKind::Lava: return 9;
  }
  return 0;
}

int state_index(CellKind k) {
  if (k == CellKind::LockedDoor) return 2;
  return 0;  // open / not applicable
}

}  // namespace

Observation observe(const GridState& s) {
  Observation obs(kObsDim, 0.0);
  const int dir = static_cast<int>(s.agent_dir);
  // forward and right unit vectors in world coordinates
  const int fdx = kDirDx[dir], fdy = kDirDy[dir];
  const int rdx = kDirDx[(dir + 1) % 4], rdy = kDirDy[(dir + 1) % 4];

  for (int row = 0; row < kViewSize; ++row) {
    const int ahead = kViewSize - 1 - row;  // row 6 is the agent's own row
    for (int col = 0; col < kViewSize; ++col) {
      const int side = col - kViewSize / 2;  // negative = left of the agent
      const int wx = s.agent_x + ahead * fdx + side * rdx;
      const int wy = s.agent_y + ahead * fdy + side * rdy;
      Cell cell{CellKind::Wall, Color::Grey};
      if (s.in_bounds(wx, wy)) {
        cell = s.at(wx, wy);
        if (wx == s.agent_x && wy == s.agent_y && s.carrying) cell = *s.carrying;
      }
      const std::size_t base = (static_cast<std::size_t>(row) * kViewSize + col) * 3;
      obs[base + 0] = object_index(cell.kind) / 10.0;
      obs[base + 1] = static_cast<int>(cell.color) / 5.0;
      obs[base + 2] = state_index(cell.kind) / 2.0;
    }
  }
  return obs;
}

std::string render_ascii(const GridState& s) {
  std::string out;
  out.reserve(static_cast<std::size_t>(s.height) * (s.width + 1));
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      char c = '?';
      switch (s.at(x, y).kind) {
        case CellKind::Empty: c = '.'; break;
        case CellKind::Wall: c = '#'; break;
        case CellKind::LockedDoor: c = 'D'; break;
        case CellKind::OpenDoor: c = '_'; break;
        case CellKind::Key: c = 'K'; break;
        case CellKind::Goal: c = 'G'; break;
        case CellKind::Lava: c = '~'; break;
      }
      if (x == s.agent_x && y == s.agent_y) c = ">v<^"[static_cast<int>(s.agent_dir)];
      out.push_back(c);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace disrc
