#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace silab {

// Object, color and state ids follow the MiniGrid compact encoding so that
// observations stay small bounded integers.
enum class ObjectType : std::uint8_t {
  kUnseen = 0,
  kEmpty = 1,
  kWall = 2,
  kFloor = 3,
  kDoor = 4,
  kKey = 5,
  kBall = 6,
  kBox = 7,
  kGoal = 8,
  kAgent = 10,
};

enum class Color : std::uint8_t {
  kRed = 0,
  kGreen = 1,
  kBlue = 2,
  kPurple = 3,
  kYellow = 4,
  kGrey = 5,
};
inline constexpr int kNumColors = 6;

enum class DoorState : std::uint8_t { kOpen = 0, kClosed = 1, kLocked = 2 };

enum class Direction : std::uint8_t { kEast = 0, kSouth = 1, kWest = 2, kNorth = 3 };

enum class Action : std::uint8_t {
  kTurnLeft = 0,
  kTurnRight = 1,
  kForward = 2,
  kPickup = 3,
  kDrop = 4,
  kToggle = 5,
  kDone = 6,
};
inline constexpr int kNumActions = 7;

struct Cell {
  ObjectType type = ObjectType::kEmpty;
  Color color = Color::kRed;
  DoorState door = DoorState::kOpen;  // meaningful for doors only
  // Box contents; kEmpty when the box holds nothing.
  ObjectType contains = ObjectType::kEmpty;
  Color contains_color = Color::kRed;

  static Cell Empty() { return {}; }
  static Cell Wall() { return {ObjectType::kWall, Color::kGrey}; }
  static Cell Goal() { return {ObjectType::kGoal, Color::kGreen}; }
  static Cell Door(Color c, DoorState s) { return {ObjectType::kDoor, c, s}; }
  static Cell Key(Color c) { return {ObjectType::kKey, c}; }
  static Cell Ball(Color c) { return {ObjectType::kBall, c}; }
  static Cell Box(Color c, std::optional<Cell> content = std::nullopt);

  bool passable() const;
  bool opaque() const;
  bool can_pickup() const { return type == ObjectType::kKey || type == ObjectType::kBall; }

  friend bool operator==(const Cell&, const Cell&) = default;
};

// 7x7x3 egocentric view. Index (row * 7 + col) * 3 + channel; row 0 is the
// farthest row ahead of the agent, the agent sits at row 6, col 3.
inline constexpr int kViewSize = 7;
inline constexpr int kObsChannels = 3;
inline constexpr int kObsSize = kViewSize * kViewSize * kObsChannels;

struct Observation {
  std::array<std::uint8_t, kObsSize> data{};

  std::uint8_t at(int row, int col, int channel) const {
    return data[(row * kViewSize + col) * kObsChannels + channel];
  }
  std::uint8_t& at(int row, int col, int channel) {
    return data[(row * kViewSize + col) * kObsChannels + channel];
  }
  // FNV-1a over the raw bytes; stable across runs and platforms.
  std::uint64_t hash() const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct ObservationHash {
  std::size_t operator()(const Observation& obs) const { return obs.hash(); }
};

enum class TaskKind : std::uint8_t { kMultiRoom, kObstructedMazeLite };

struct TaskSpec {
  TaskKind kind = TaskKind::kMultiRoom;
  int n_rooms = 2;
  int max_room_size = 4;

  static TaskSpec MultiRoom(int n_rooms, int max_room_size) {
    return {TaskKind::kMultiRoom, n_rooms, max_room_size};
  }
  static TaskSpec ObstructedMazeLite() { return {TaskKind::kObstructedMazeLite, 2, 6}; }

  int max_steps() const;
  std::string name() const;
  // Throws std::invalid_argument when parameters are out of bounds.
  void validate() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// Parses "multiroom:N:S" / "multiroom" (2, 4 defaults) / "obstructedmaze".
TaskSpec ParseTaskSpec(const std::string& text);

struct Pose {
  int row = 0;
  int col = 0;
  Direction dir = Direction::kEast;
  friend bool operator==(const Pose&, const Pose&) = default;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Immutable description of one task instance.
struct Level {
  TaskSpec task;
  std::int64_t level_id = 0;
  int width = 0;
  int height = 0;
  std::vector<Cell> grid;  // row-major, height x width
  Pose agent_start;
  // Object whose pickup completes the task (ObstructedMazeLite); kEmpty when
  // the task ends on reaching a goal cell.
  Cell pickup_target = Cell::Empty();
  int max_steps = 0;
  int optimal_steps = 0;

  const Cell& at(int row, int col) const { return grid[row * width + col]; }
  Cell& at(int row, int col) { return grid[row * width + col]; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && col >= 0 && row < height && col < width;
  }

  // Hand-built levels for tests and tooling. Legend:
  //   '#' wall, '.' empty, 'G' goal, 'D' closed door, 'L' locked door,
  //   '_' open door, 'K' key, 'A' ball, 'B' box holding a key,
  //   'T' blue target ball (picking it up completes the task),
  //   '>' 'v' '<' '^' agent start facing east/south/west/north.
  // Doors, keys and balls are yellow. optimal_steps is computed by the solver
  // when the map has a goal or target, and left at 0 otherwise.
  static Level FromAscii(const std::vector<std::string>& rows, int max_steps,
                         TaskKind kind = TaskKind::kMultiRoom);
};

// Deterministic seeded generation; throws GenerationError when room placement
// fails for this seed. Generated levels always carry a valid optimal_steps.
Level GenerateLevel(const TaskSpec& task, std::int64_t level_id);

// Mutable part of an episode. Cells that differ from the level's base grid are
// kept in a sorted overlay so that equal world states compare equal.
struct WorldState {
  Pose agent;
  Cell carrying = Cell::Empty();
  std::vector<std::pair<int, Cell>> overlay;  // (flat index, cell), sorted

  const Cell& cell(const Level& level, int row, int col) const;
  void set_cell(const Level& level, int row, int col, const Cell& value);
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

WorldState InitialWorld(const Level& level);

// Applies one action without any time bookkeeping. Returns true when the
// action completes the task.
bool ApplyAction(const Level& level, WorldState& world, Action action);

Observation Observe(const Level& level, const WorldState& world);

// Rewards the goal at step t (1-based) with 1 - 0.9 * t / max_steps.
double SuccessReward(int step, int max_steps);

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  std::int64_t level_id = 0;
  int step_count = 0;
};

// Single-owner episode state machine over one level.
class GridEnv {
 public:
  explicit GridEnv(std::shared_ptr<const Level> level);

  StepResult step(Action action);
  StepResult step(int action);
  Observation observe() const { return Observe(*level_, world_); }

  const Level& level() const { return *level_; }
  const WorldState& world() const { return world_; }
  int step_count() const { return steps_; }
  bool done() const { return done_; }

 private:
  std::shared_ptr<const Level> level_;
  WorldState world_;
  int steps_ = 0;
  bool done_ = false;
};

struct Solution {
  int steps = 0;
  std::vector<Action> actions;
};

// Breadth-first search over (pose, carried item, grid changes). Throws
// GenerationError if the goal is unreachable.
Solution Solve(const Level& level);
int OptimalSteps(const Level& level);

std::string RenderAscii(const Level& level);
std::string LevelToJson(const Level& level, int indent = -1);

}  // namespace silab
