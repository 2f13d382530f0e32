#pragma once

// Breadth-first search over agent poses (cell x heading) with the
// turn_left / turn_right / forward moves, so the plan length equals the
// number of environment steps.

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "talkitout/state.hpp"

namespace talkitout {

struct Pose {
  Pos pos;
  Dir dir = Dir::north;
  auto operator<=>(const Pose&) const = default;
};

constexpr Pose apply(Pose p, Primitive a) {
  switch (a) {
    case Primitive::turn_left: return {p.pos, turn_left(p.dir)};
    case Primitive::turn_right: return {p.pos, turn_right(p.dir)};
    case Primitive::forward: return {p.pos + forward_vec(p.dir), p.dir};
    default: return p;
  }
}

// Shortest primitive sequence from `start` to any pose satisfying `is_goal`,
// moving forward only into cells where `passable` holds. Empty plan when the
// start already satisfies the goal; nullopt when no goal is reachable.
template <typename Passable, typename Goal>
std::optional<std::vector<Primitive>> plan_path(Pose start, Passable&& passable, Goal&& is_goal,
                                                int max_depth = 256) {
  if (is_goal(start)) return std::vector<Primitive>{};
  std::map<Pose, std::pair<Pose, Primitive>> parent;
  std::queue<std::pair<Pose, int>> frontier;
  parent.emplace(start, std::pair{start, Primitive::done});
  frontier.push({start, 0});
  constexpr Primitive kMoves[] = {Primitive::forward, Primitive::turn_left, Primitive::turn_right};
  while (!frontier.empty()) {
    const auto [pose, depth] = frontier.front();
    frontier.pop();
    if (depth >= max_depth) continue;
    for (const auto move : kMoves) {
      const Pose next = apply(pose, move);
      if (move == Primitive::forward && !passable(next.pos)) continue;
      if (parent.contains(next)) continue;
      parent.emplace(next, std::pair{pose, move});
      if (is_goal(next)) {
        std::vector<Primitive> plan;
        for (Pose p = next; !(p == start); p = parent.at(p).first) plan.push_back(parent.at(p).second);
        std::reverse(plan.begin(), plan.end());
        return plan;
      }
      frontier.push({next, depth + 1});
    }
  }
  return std::nullopt;
}

// Cells visited by executing `plan` from `start`, starting cell included.
inline std::vector<Pos> cell_path(Pose start, const std::vector<Primitive>& plan) {
  std::vector<Pos> cells{start.pos};
  Pose p = start;
  for (const auto a : plan) {
    p = apply(p, a);
    if (!(p.pos == cells.back())) cells.push_back(p.pos);
  }
  return cells;
}

}  // namespace talkitout
