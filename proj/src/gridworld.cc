#include "silab/gridworld.h"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace silab {

namespace {

constexpr int kDirRow[4] = {0, 1, 0, -1};
constexpr int kDirCol[4] = {1, 0, -1, 0};

Direction TurnLeft(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 3) % 4);
}
Direction TurnRight(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 1) % 4);
}

const Cell& OutOfBoundsCell() {
  static const Cell wall = Cell::Wall();
  return wall;
}

void EncodeCell(const Cell& cell, Observation& obs, int row, int col) {
  obs.at(row, col, 0) = static_cast<std::uint8_t>(cell.type);
  if (cell.type == ObjectType::kEmpty) {
    obs.at(row, col, 1) = 0;
    obs.at(row, col, 2) = 0;
    return;
  }
  obs.at(row, col, 1) = static_cast<std::uint8_t>(cell.color);
  obs.at(row, col, 2) =
      cell.type == ObjectType::kDoor ? static_cast<std::uint8_t>(cell.door) : 0;
}

const char* TaskKindName(TaskKind kind) {
  return kind == TaskKind::kMultiRoom ? "multiroom" : "obstructedmaze";
}

}  // namespace

Cell Cell::Box(Color c, std::optional<Cell> content) {
  Cell box{ObjectType::kBox, c};
  if (content) {
    box.contains = content->type;
    box.contains_color = content->color;
  }
  return box;
}

bool Cell::passable() const {
  switch (type) {
    case ObjectType::kEmpty:
    case ObjectType::kFloor:
    case ObjectType::kGoal:
      return true;
    case ObjectType::kDoor:
      return door == DoorState::kOpen;
    default:
      return false;
  }
}

bool Cell::opaque() const {
  return type == ObjectType::kWall ||
         (type == ObjectType::kDoor && door != DoorState::kOpen);
}

std::uint64_t Observation::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int TaskSpec::max_steps() const {
  return kind == TaskKind::kMultiRoom ? 20 * n_rooms : 288;
}

std::string TaskSpec::name() const {
  if (kind == TaskKind::kObstructedMazeLite) return "obstructedmaze";
  return "multiroom:" + std::to_string(n_rooms) + ":" + std::to_string(max_room_size);
}

void TaskSpec::validate() const {
  if (kind != TaskKind::kMultiRoom) return;
  if (n_rooms < 2 || n_rooms > 12) {
    throw std::invalid_argument("n_rooms must be in [2, 12], got " +
                                std::to_string(n_rooms));
  }
  if (max_room_size < 4 || max_room_size > 10) {
    throw std::invalid_argument("max_room_size must be in [4, 10], got " +
                                std::to_string(max_room_size));
  }
}

TaskSpec ParseTaskSpec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.empty()) throw std::invalid_argument("empty task spec");
  if (parts[0] == "obstructedmaze" && parts.size() == 1) {
    return TaskSpec::ObstructedMazeLite();
  }
  if (parts[0] == "multiroom") {
    TaskSpec spec = TaskSpec::MultiRoom(2, 4);
    try {
      if (parts.size() == 3) {
        spec.n_rooms = std::stoi(parts[1]);
        spec.max_room_size = std::stoi(parts[2]);
      } else if (parts.size() != 1) {
        throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed task spec '" + text +
                                  "', expected multiroom:N:S");
    }
    spec.validate();
    return spec;
  }
  throw std::invalid_argument("unknown task '" + text + "'");
}

Level Level::FromAscii(const std::vector<std::string>& rows, int max_steps,
                       TaskKind kind) {
  if (rows.empty()) throw std::invalid_argument("empty map");
  Level level;
  level.task.kind = kind;
  level.height = static_cast<int>(rows.size());
  level.width = static_cast<int>(rows[0].size());
  level.max_steps = max_steps;
  level.grid.assign(level.width * level.height, Cell::Empty());
  bool has_agent = false;
  bool has_objective = false;
  for (int r = 0; r < level.height; ++r) {
    if (static_cast<int>(rows[r].size()) != level.width) {
      throw std::invalid_argument("ragged map row " + std::to_string(r));
    }
    for (int c = 0; c < level.width; ++c) {
      Cell& cell = level.at(r, c);
      switch (rows[r][c]) {
        case '#': cell = Cell::Wall(); break;
        case '.': break;
        case 'G': cell = Cell::Goal(); has_objective = true; break;
        case 'D': cell = Cell::Door(Color::kYellow, DoorState::kClosed); break;
        case 'L': cell = Cell::Door(Color::kYellow, DoorState::kLocked); break;
        case '_': cell = Cell::Door(Color::kYellow, DoorState::kOpen); break;
        case 'K': cell = Cell::Key(Color::kYellow); break;
        case 'A': cell = Cell::Ball(Color::kYellow); break;
        case 'B': cell = Cell::Box(Color::kPurple, Cell::Key(Color::kYellow)); break;
        case 'T':
          cell = Cell::Ball(Color::kBlue);
          level.pickup_target = cell;
          has_objective = true;
          break;
        case '>': case 'v': case '<': case '^': {
          const std::string arrows = ">v<^";
          level.agent_start = {r, c, static_cast<Direction>(arrows.find(rows[r][c]))};
          has_agent = true;
          break;
        }
        default:
          throw std::invalid_argument(std::string("unknown map symbol '") +
                                      rows[r][c] + "'");
      }
    }
  }
  if (!has_agent) throw std::invalid_argument("map has no agent");
  if (has_objective) level.optimal_steps = OptimalSteps(level);
  return level;
}

const Cell& WorldState::cell(const Level& level, int row, int col) const {
  if (!level.in_bounds(row, col)) return OutOfBoundsCell();
  const int index = row * level.width + col;
  auto it = std::lower_bound(
      overlay.begin(), overlay.end(), index,
      [](const std::pair<int, Cell>& entry, int key) { return entry.first < key; });
  if (it != overlay.end() && it->first == index) return it->second;
  return level.grid[index];
}

void WorldState::set_cell(const Level& level, int row, int col, const Cell& value) {
  const int index = row * level.width + col;
  auto it = std::lower_bound(
      overlay.begin(), overlay.end(), index,
      [](const std::pair<int, Cell>& entry, int key) { return entry.first < key; });
  const bool present = it != overlay.end() && it->first == index;
  if (value == level.grid[index]) {
    if (present) overlay.erase(it);
  } else if (present) {
    it->second = value;
  } else {
    overlay.insert(it, {index, value});
  }
}

WorldState InitialWorld(const Level& level) {
  WorldState world;
  world.agent = level.agent_start;
  return world;
}

bool ApplyAction(const Level& level, WorldState& world, Action action) {
  Pose& agent = world.agent;
  const int d = static_cast<int>(agent.dir);
  const int front_row = agent.row + kDirRow[d];
  const int front_col = agent.col + kDirCol[d];
  const bool front_valid = level.in_bounds(front_row, front_col);
  const Cell front = world.cell(level, front_row, front_col);

  switch (action) {
    case Action::kTurnLeft:
      agent.dir = TurnLeft(agent.dir);
      return false;
    case Action::kTurnRight:
      agent.dir = TurnRight(agent.dir);
      return false;
    case Action::kForward:
      if (front_valid && front.passable()) {
        agent.row = front_row;
        agent.col = front_col;
        return front.type == ObjectType::kGoal;
      }
      return false;
    case Action::kPickup:
      if (front_valid && front.can_pickup() &&
          world.carrying.type == ObjectType::kEmpty) {
        world.carrying = front;
        world.set_cell(level, front_row, front_col, Cell::Empty());
        return level.pickup_target.type != ObjectType::kEmpty &&
               front == level.pickup_target;
      }
      return false;
    case Action::kDrop:
      if (front_valid && front.type == ObjectType::kEmpty &&
          world.carrying.type != ObjectType::kEmpty) {
        world.set_cell(level, front_row, front_col, world.carrying);
        world.carrying = Cell::Empty();
      }
      return false;
    case Action::kToggle:
      if (!front_valid) return false;
      if (front.type == ObjectType::kDoor) {
        Cell door = front;
        if (door.door == DoorState::kLocked) {
          if (world.carrying.type == ObjectType::kKey &&
              world.carrying.color == door.color) {
            door.door = DoorState::kOpen;
          }
        } else {
          door.door = door.door == DoorState::kOpen ? DoorState::kClosed
                                                    : DoorState::kOpen;
        }
        world.set_cell(level, front_row, front_col, door);
      } else if (front.type == ObjectType::kBox) {
        Cell content = Cell::Empty();
        if (front.contains != ObjectType::kEmpty) {
          content.type = front.contains;
          content.color = front.contains_color;
        }
        world.set_cell(level, front_row, front_col, content);
      }
      return false;
    case Action::kDone:
      return false;
  }
  return false;
}

Observation Observe(const Level& level, const WorldState& world) {
  const Pose& agent = world.agent;
  const int d = static_cast<int>(agent.dir);
  const int right = (d + 1) % 4;

  // Gather the window in view coordinates first.
  std::array<Cell, kViewSize * kViewSize> window;
  for (int vr = 0; vr < kViewSize; ++vr) {
    for (int vc = 0; vc < kViewSize; ++vc) {
      const int ahead = kViewSize - 1 - vr;
      const int side = vc - kViewSize / 2;
      const int row = agent.row + ahead * kDirRow[d] + side * kDirRow[right];
      const int col = agent.col + ahead * kDirCol[d] + side * kDirCol[right];
      window[vr * kViewSize + vc] = world.cell(level, row, col);
    }
  }
  const int agent_vr = kViewSize - 1;
  const int agent_vc = kViewSize / 2;
  // The agent's own cell shows what it carries.
  window[agent_vr * kViewSize + agent_vc] = world.carrying;

  // Shadow casting sweep: visibility spreads forward and sideways from the
  // agent and stops at opaque cells.
  std::array<bool, kViewSize * kViewSize> visible{};
  auto vis = [&](int r, int c) -> bool& { return visible[r * kViewSize + c]; };
  vis(agent_vr, agent_vc) = true;
  for (int r = kViewSize - 1; r >= 0; --r) {
    for (int c = 0; c < kViewSize - 1; ++c) {
      if (!vis(r, c) || window[r * kViewSize + c].opaque()) continue;
      vis(r, c + 1) = true;
      if (r > 0) {
        vis(r - 1, c + 1) = true;
        vis(r - 1, c) = true;
      }
    }
    for (int c = kViewSize - 1; c > 0; --c) {
      if (!vis(r, c) || window[r * kViewSize + c].opaque()) continue;
      vis(r, c - 1) = true;
      if (r > 0) {
        vis(r - 1, c - 1) = true;
        vis(r - 1, c) = true;
      }
    }
  }

  Observation obs;
  for (int r = 0; r < kViewSize; ++r) {
    for (int c = 0; c < kViewSize; ++c) {
      if (vis(r, c)) EncodeCell(window[r * kViewSize + c], obs, r, c);
    }
  }
  return obs;
}

double SuccessReward(int step, int max_steps) {
  return 1.0 - 0.9 * (static_cast<double>(step) / max_steps);
}

GridEnv::GridEnv(std::shared_ptr<const Level> level)
    : level_(std::move(level)), world_(InitialWorld(*level_)) {}

StepResult GridEnv::step(int action) {
  if (action < 0 || action >= kNumActions) {
    throw ContractViolation("action out of range: " + std::to_string(action));
  }
  return step(static_cast<Action>(action));
}

StepResult GridEnv::step(Action action) {
  if (done_) throw ContractViolation("step() called on a finished episode");
  ++steps_;
  StepResult result;
  result.success = ApplyAction(*level_, world_, action);
  result.reward = result.success ? SuccessReward(steps_, level_->max_steps) : 0.0;
  done_ = result.success || steps_ >= level_->max_steps;
  result.done = done_;
  result.obs = observe();
  result.level_id = level_->level_id;
  result.step_count = steps_;
  return result;
}

std::string RenderAscii(const Level& level) {
  std::string out;
  for (int r = 0; r < level.height; ++r) {
    for (int c = 0; c < level.width; ++c) {
      if (level.agent_start.row == r && level.agent_start.col == c) {
        out += ">v<^"[static_cast<int>(level.agent_start.dir)];
        continue;
      }
      const Cell& cell = level.at(r, c);
      char ch = '?';
      switch (cell.type) {
        case ObjectType::kWall: ch = '#'; break;
        case ObjectType::kEmpty: ch = '.'; break;
        case ObjectType::kFloor: ch = '.'; break;
        case ObjectType::kGoal: ch = 'G'; break;
        case ObjectType::kDoor:
          ch = cell.door == DoorState::kOpen ? '_'
               : cell.door == DoorState::kLocked ? 'L' : 'D';
          break;
        case ObjectType::kKey: ch = 'K'; break;
        case ObjectType::kBall:
          ch = (level.pickup_target.type != ObjectType::kEmpty &&
                cell == level.pickup_target) ? 'T' : 'A';
          break;
        case ObjectType::kBox: ch = 'B'; break;
        default: break;
      }
      out += ch;
    }
    out += '\n';
  }
  return out;
}

std::string LevelToJson(const Level& level, int indent) {
  using nlohmann::json;
  json cells = json::array();
  for (const Cell& cell : level.grid) {
    cells.push_back({static_cast<int>(cell.type), static_cast<int>(cell.color),
                     static_cast<int>(cell.door), static_cast<int>(cell.contains),
                     static_cast<int>(cell.contains_color)});
  }
  json rows = json::array();
  std::stringstream ascii(RenderAscii(level));
  for (std::string line; std::getline(ascii, line);) rows.push_back(line);
  json doc = {
      {"task",
       {{"kind", TaskKindName(level.task.kind)},
        {"n_rooms", level.task.n_rooms},
        {"max_room_size", level.task.max_room_size}}},
      {"level_id", level.level_id},
      {"width", level.width},
      {"height", level.height},
      {"max_steps", level.max_steps},
      {"optimal_steps", level.optimal_steps},
      {"agent_start",
       {{"row", level.agent_start.row},
        {"col", level.agent_start.col},
        {"dir", static_cast<int>(level.agent_start.dir)}}},
      {"rows", rows},
      {"cells", cells},
  };
  return doc.dump(indent);
}

}  // namespace silab
