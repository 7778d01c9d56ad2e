#include <string>

#include "silab/gridworld.h"
#include "silab/random.h"

namespace silab {

namespace {

constexpr int kMultiRoomGridSize = 25;
constexpr int kPlacementAttempts = 64;

struct Room {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
  int entry_side = -1;  // wall side (0 E, 1 S, 2 W, 3 N) holding the entry door

  bool contains(int r, int c) const {
    return r >= top && r < top + height && c >= left && c < left + width;
  }
  bool interior(int r, int c) const {
    return r > top && r < top + height - 1 && c > left && c < left + width - 1;
  }
};

bool RectsOverlap(int t1, int l1, int h1, int w1, int t2, int l2, int h2, int w2) {
  return t1 < t2 + h2 && t2 < t1 + h1 && l1 < l2 + w2 && l2 < l1 + w1;
}

// Rooms may share walls but no room's interior may touch another room.
bool Compatible(const Room& a, const Room& b) {
  return !RectsOverlap(a.top + 1, a.left + 1, a.height - 2, a.width - 2, b.top,
                       b.left, b.height, b.width) &&
         !RectsOverlap(b.top + 1, b.left + 1, b.height - 2, b.width - 2, a.top,
                       a.left, a.height, a.width);
}

Rng LevelRng(const TaskSpec& task, std::int64_t level_id) {
  std::uint64_t tag = static_cast<std::uint64_t>(task.kind) * 1000003ULL +
                      static_cast<std::uint64_t>(task.n_rooms) * 1009ULL +
                      static_cast<std::uint64_t>(task.max_room_size);
  return Rng::Derive(static_cast<std::uint64_t>(level_id), tag);
}

Color RandomColor(Rng& rng) {
  return static_cast<Color>(rng.uniform_int(0, kNumColors - 1));
}

std::string SeedMessage(const TaskSpec& task, std::int64_t level_id, const char* what) {
  return task.name() + " level " + std::to_string(level_id) + ": " + what;
}

Level GenerateMultiRoom(const TaskSpec& task, std::int64_t level_id) {
  Rng rng = LevelRng(task, level_id);
  const int size = kMultiRoomGridSize;
  const int min_room = 4;
  const int max_room = task.max_room_size;

  struct DoorSpot {
    int row;
    int col;
    Color color;
  };
  std::vector<Room> rooms;
  std::vector<DoorSpot> doors;

  Room first;
  first.height = static_cast<int>(rng.uniform_int(min_room, max_room));
  first.width = static_cast<int>(rng.uniform_int(min_room, max_room));
  first.top = static_cast<int>(rng.uniform_int(0, size - first.height));
  first.left = static_cast<int>(rng.uniform_int(0, size - first.width));
  rooms.push_back(first);

  for (int i = 1; i < task.n_rooms; ++i) {
    const Room prev = rooms.back();
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      int side = static_cast<int>(rng.uniform_int(0, 3));
      if (side == prev.entry_side) continue;
      Room next;
      next.height = static_cast<int>(rng.uniform_int(min_room, max_room));
      next.width = static_cast<int>(rng.uniform_int(min_room, max_room));
      next.entry_side = (side + 2) % 4;
      int door_row = 0;
      int door_col = 0;
      if (side == 0 || side == 2) {
        door_row = static_cast<int>(rng.uniform_int(prev.top + 1, prev.top + prev.height - 2));
        door_col = side == 0 ? prev.left + prev.width - 1 : prev.left;
        const int offset = static_cast<int>(rng.uniform_int(1, next.height - 2));
        next.top = door_row - offset;
        next.left = side == 0 ? door_col : door_col - next.width + 1;
      } else {
        door_col = static_cast<int>(rng.uniform_int(prev.left + 1, prev.left + prev.width - 2));
        door_row = side == 1 ? prev.top + prev.height - 1 : prev.top;
        const int offset = static_cast<int>(rng.uniform_int(1, next.width - 2));
        next.left = door_col - offset;
        next.top = side == 1 ? door_row : door_row - next.height + 1;
      }
      if (next.top < 0 || next.left < 0 || next.top + next.height > size ||
          next.left + next.width > size) {
        continue;
      }
      bool ok = true;
      for (const Room& other : rooms) ok = ok && Compatible(other, next);
      if (!ok) continue;
      Color color = RandomColor(rng);
      if (!doors.empty()) {
        while (color == doors.back().color) color = RandomColor(rng);
      }
      rooms.push_back(next);
      doors.push_back({door_row, door_col, color});
      placed = true;
    }
    if (!placed) {
      throw GenerationError(SeedMessage(task, level_id, "room placement failed"));
    }
  }

  Level level;
  level.task = task;
  level.level_id = level_id;
  level.width = size;
  level.height = size;
  level.max_steps = task.max_steps();
  // Everything outside rooms is solid wall.
  level.grid.assign(size * size, Cell::Wall());
  for (const Room& room : rooms) {
    for (int r = room.top + 1; r < room.top + room.height - 1; ++r) {
      for (int c = room.left + 1; c < room.left + room.width - 1; ++c) {
        level.at(r, c) = Cell::Empty();
      }
    }
  }
  for (const DoorSpot& door : doors) {
    level.at(door.row, door.col) = Cell::Door(door.color, DoorState::kClosed);
  }

  const Room& start = rooms.front();
  level.agent_start.row = static_cast<int>(rng.uniform_int(start.top + 1, start.top + start.height - 2));
  level.agent_start.col = static_cast<int>(rng.uniform_int(start.left + 1, start.left + start.width - 2));
  level.agent_start.dir = static_cast<Direction>(rng.uniform_int(0, 3));
  const Room& last = rooms.back();
  const int goal_row = static_cast<int>(rng.uniform_int(last.top + 1, last.top + last.height - 2));
  const int goal_col = static_cast<int>(rng.uniform_int(last.left + 1, last.left + last.width - 2));
  level.at(goal_row, goal_col) = Cell::Goal();
  return level;
}

// Two 6x6 rooms sharing a wall. The locked door is blocked by a ball, its key
// sits inside a box, and a blue ball in the far room is the target.
Level GenerateObstructedMaze(const TaskSpec& task, std::int64_t level_id) {
  Rng rng = LevelRng(task, level_id);
  constexpr int kRoom = 6;
  Level level;
  level.task = task;
  level.level_id = level_id;
  level.width = 2 * kRoom - 1;
  level.height = kRoom;
  level.max_steps = task.max_steps();

  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    level.grid.assign(level.width * level.height, Cell::Empty());
    for (int c = 0; c < level.width; ++c) {
      level.at(0, c) = Cell::Wall();
      level.at(level.height - 1, c) = Cell::Wall();
    }
    for (int r = 0; r < level.height; ++r) {
      level.at(r, 0) = Cell::Wall();
      level.at(r, kRoom - 1) = Cell::Wall();
      level.at(r, level.width - 1) = Cell::Wall();
    }
    const int door_row = static_cast<int>(rng.uniform_int(1, kRoom - 2));
    const Color door_color = static_cast<Color>(rng.uniform_int(0, kNumColors - 1));
    level.at(door_row, kRoom - 1) = Cell::Door(door_color, DoorState::kLocked);

    Color blocker_color = RandomColor(rng);
    while (blocker_color == Color::kBlue) blocker_color = RandomColor(rng);
    level.at(door_row, kRoom - 2) = Cell::Ball(blocker_color);

    auto free_cell_in = [&](int col_lo, int col_hi, int& row, int& col) {
      for (int tries = 0; tries < kPlacementAttempts; ++tries) {
        row = static_cast<int>(rng.uniform_int(1, kRoom - 2));
        col = static_cast<int>(rng.uniform_int(col_lo, col_hi));
        if (level.at(row, col).type == ObjectType::kEmpty) return true;
      }
      return false;
    };
    int box_row, box_col, agent_row, agent_col, target_row, target_col;
    if (!free_cell_in(1, kRoom - 2, box_row, box_col)) continue;
    level.at(box_row, box_col) = Cell::Box(RandomColor(rng), Cell::Key(door_color));
    if (!free_cell_in(1, kRoom - 2, agent_row, agent_col)) continue;
    if (!free_cell_in(kRoom, level.width - 2, target_row, target_col)) continue;
    level.pickup_target = Cell::Ball(Color::kBlue);
    level.at(target_row, target_col) = level.pickup_target;
    level.agent_start = {agent_row, agent_col,
                         static_cast<Direction>(rng.uniform_int(0, 3))};
    try {
      level.optimal_steps = OptimalSteps(level);
    } catch (const GenerationError&) {
      continue;
    }
    if (level.optimal_steps <= level.max_steps) return level;
  }
  throw GenerationError(SeedMessage(task, level_id, "object placement failed"));
}

}  // namespace

Level GenerateLevel(const TaskSpec& task, std::int64_t level_id) {
  if (level_id < 0) throw std::invalid_argument("level_id must be >= 0");
  task.validate();
  if (task.kind == TaskKind::kObstructedMazeLite) {
    return GenerateObstructedMaze(task, level_id);
  }
  Level level = GenerateMultiRoom(task, level_id);
  level.optimal_steps = OptimalSteps(level);
  if (level.optimal_steps > level.max_steps) {
    throw GenerationError(SeedMessage(task, level_id, "solution exceeds max_steps"));
  }
  return level;
}

}  // namespace silab
