#include <algorithm>
#include <deque>
#include <string>
#include <unordered_map>

#include "silab/gridworld.h"

namespace silab {

namespace {

void AppendCell(std::string& key, const Cell& cell) {
  key.push_back(static_cast<char>(cell.type));
  key.push_back(static_cast<char>(cell.color));
  key.push_back(static_cast<char>(cell.door));
  key.push_back(static_cast<char>(cell.contains));
  key.push_back(static_cast<char>(cell.contains_color));
}

std::string StateKey(const WorldState& world) {
  std::string key;
  key.reserve(16 + world.overlay.size() * 7);
  key.push_back(static_cast<char>(world.agent.row));
  key.push_back(static_cast<char>(world.agent.col));
  key.push_back(static_cast<char>(world.agent.dir));
  AppendCell(key, world.carrying);
  for (const auto& [index, cell] : world.overlay) {
    key.push_back(static_cast<char>(index & 0xff));
    key.push_back(static_cast<char>(index >> 8));
    AppendCell(key, cell);
  }
  return key;
}

// Closing an unlocked door can only remove options, so the search skips it.
bool ClosesDoor(const Level& level, const WorldState& world, Action action) {
  if (action != Action::kToggle) return false;
  static constexpr int kDirRow[4] = {0, 1, 0, -1};
  static constexpr int kDirCol[4] = {1, 0, -1, 0};
  const int d = static_cast<int>(world.agent.dir);
  const Cell& front =
      world.cell(level, world.agent.row + kDirRow[d], world.agent.col + kDirCol[d]);
  return front.type == ObjectType::kDoor && front.door == DoorState::kOpen;
}

}  // namespace

Solution Solve(const Level& level) {
  struct Node {
    WorldState world;
    int parent;
    Action action;
  };
  std::vector<Node> nodes;
  std::unordered_map<std::string, int> seen;
  std::deque<int> frontier;

  nodes.push_back({InitialWorld(level), -1, Action::kDone});
  seen.emplace(StateKey(nodes[0].world), 0);
  frontier.push_back(0);

  auto backtrack = [&](int index, Action last) {
    Solution solution;
    solution.actions.push_back(last);
    for (int i = index; nodes[i].parent >= 0; i = nodes[i].parent) {
      solution.actions.push_back(nodes[i].action);
    }
    std::reverse(solution.actions.begin(), solution.actions.end());
    solution.steps = static_cast<int>(solution.actions.size());
    return solution;
  };

  while (!frontier.empty()) {
    const int current = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < kNumActions; ++a) {
      const auto action = static_cast<Action>(a);
      if (action == Action::kDone) continue;
      if (ClosesDoor(level, nodes[current].world, action)) continue;
      WorldState next = nodes[current].world;
      if (ApplyAction(level, next, action)) return backtrack(current, action);
      std::string key = StateKey(next);
      if (seen.contains(key)) continue;
      seen.emplace(std::move(key), static_cast<int>(nodes.size()));
      nodes.push_back({std::move(next), current, action});
      frontier.push_back(static_cast<int>(nodes.size()) - 1);
    }
  }
  throw GenerationError("goal unreachable in level " + std::to_string(level.level_id));
}

int OptimalSteps(const Level& level) { return Solve(level).steps; }

}  // namespace silab
