#pragma once

// Episode generation, step semantics, extrinsic reward and view encoding.

#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "talkitout/errors.hpp"
#include "talkitout/grammar.hpp"
#include "talkitout/npc.hpp"
#include "talkitout/rng.hpp"
#include "talkitout/state.hpp"

namespace talkitout {

// 1 - 0.9 t / t_max, for 1 <= t <= t_max.
inline double extrinsic_reward(int t, int t_max = 40) {
  if (t < 1 || t > t_max) {
    throw DomainError("extrinsic reward undefined for t=" + std::to_string(t));
  }
  return 1.0 - 0.9 * static_cast<double>(t) / static_cast<double>(t_max);
}

namespace detail {

// Every non-NPC interior cell is reachable from the agent, and every NPC
// has a reachable neighbour to be spoken to from.
inline bool layout_connected(const WorldState& s) {
  std::vector<char> seen(static_cast<std::size_t>(s.width * s.height), 0);
  auto idx = [&](Pos p) { return static_cast<std::size_t>(p.y * s.width + p.x); };
  std::queue<Pos> q;
  q.push(s.agent_pos);
  seen[idx(s.agent_pos)] = 1;
  int reached = 1;
  while (!q.empty()) {
    const Pos p = q.front();
    q.pop();
    for (const auto& d : kNeighbors) {
      const Pos n = p + d;
      if (s.walkable(n) && !seen[idx(n)]) {
        seen[idx(n)] = 1;
        ++reached;
        q.push(n);
      }
    }
  }
  const int interior = (s.width - 2) * (s.height - 2);
  if (reached != interior - static_cast<int>(s.npcs.size())) return false;
  for (const auto& npc : s.npcs) {
    bool ok = false;
    for (const auto& d : kNeighbors) {
      const Pos n = npc.pos + d;
      if (s.is_interior(n) && seen[idx(n)]) ok = true;
    }
    if (!ok) return false;
  }
  return true;
}

inline Pos random_wall_cell(Rng& rng, int wall, int width, int height) {
  // wall: 0 top, 1 right, 2 bottom, 3 left; corners excluded.
  switch (wall) {
    case 0: return {rng.uniform_int(1, width - 2), 0};
    case 1: return {width - 1, rng.uniform_int(1, height - 2)};
    case 2: return {rng.uniform_int(1, width - 2), height - 1};
    default: return {0, rng.uniform_int(1, height - 2)};
  }
}

inline bool place_entities(WorldState& s, Rng& rng) {
  constexpr int kMaxAttempts = 200;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Pos> taken;
    auto draw_cell = [&]() -> Pos {
      std::vector<Pos> free;
      for (int y = 1; y < s.height - 1; ++y) {
        for (int x = 1; x < s.width - 1; ++x) {
          const Pos p{x, y};
          if (s.is_door_front(p)) continue;
          if (std::find(taken.begin(), taken.end(), p) != taken.end()) continue;
          free.push_back(p);
        }
      }
      if (free.empty()) throw LayoutError("no free interior cell left");
      const Pos p = free[rng.below(free.size())];
      taken.push_back(p);
      return p;
    };
    for (auto& npc : s.npcs) npc.pos = draw_cell();
    s.agent_pos = draw_cell();
    s.agent_dir = static_cast<Dir>(rng.below(4));
    if (layout_connected(s)) return true;
  }
  return false;
}

}  // namespace detail

inline View encode_view(const WorldState& s);

inline std::string join_lines(const std::vector<HeardLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += ' ';
    out += l.serialize();
  }
  return out;
}

inline Observation observe(const WorldState& s, std::vector<HeardLine> heard_now) {
  Observation obs;
  obs.image = encode_view(s);
  if (s.config.history_mode == HistoryMode::current) {
    obs.heard_text = heard_now.empty() ? std::string("NA") : join_lines(heard_now);
  } else {
    obs.heard_text = join_lines(s.history);
  }
  obs.heard = std::move(heard_now);
  return obs;
}

namespace detail {

inline void draw_layout(WorldState& s, Rng& rng) {
  const EnvConfig& config = s.config;

  if (config.variant == Variant::door_only) {
    s.width = s.height = 5;
    const int wall = rng.uniform_int(0, 3);
    s.doors.push_back({random_wall_cell(rng, wall, s.width, s.height), Color::green});
    s.correct_door = 0;
  } else {
    s.width = rng.uniform_int(config.min_size, config.max_size);
    s.height = rng.uniform_int(config.min_size, config.max_size);
    std::array<Pos, 4> door_cells{};
    for (int wall = 0; wall < 4; ++wall) {
      door_cells[wall] = random_wall_cell(rng, wall, s.width, s.height);
    }
    std::array<Color, kNumColors> palette{Color::red, Color::green, Color::blue,
                                          Color::purple, Color::yellow, Color::grey};
    rng.partial_shuffle(std::span<Color>(palette), 4);
    for (int i = 0; i < 4; ++i) s.doors.push_back({door_cells[i], palette[i]});
    s.correct_door = rng.uniform_int(0, 3);

    const bool liar = config.variant == Variant::original;
    const int true_slot = liar ? rng.uniform_int(0, 1) : 0;
    std::array<std::string_view, 2> names = kGuideNames;
    if (rng.coin()) std::swap(names[0], names[1]);

    std::array<Color, kNumColors> npc_palette{Color::red, Color::green, Color::blue,
                                              Color::purple, Color::yellow, Color::grey};
    const int num_npcs = liar ? 3 : 2;
    rng.partial_shuffle(std::span<Color>(npc_palette), static_cast<std::size_t>(num_npcs));

    s.npcs.push_back({{}, npc_palette[0], NpcKind::wizard, std::string(kWizardName)});
    for (int g = 0; g < num_npcs - 1; ++g) {
      const NpcKind kind = g == true_slot ? NpcKind::true_guide : NpcKind::false_guide;
      s.npcs.push_back({{}, npc_palette[g + 1], kind, std::string(names[g])});
    }
    s.true_guide = 1 + true_slot;
  }
}

}  // namespace detail

// Layout draws happen in this fixed order:
//   width, height; per wall (top, right, bottom, left) the door cell;
//   door colors (partial shuffle of the six); correct door; true guide slot;
//   guide name assignment; NPC colors (partial shuffle); NPC cells in NPC
//   index order, then agent cell and heading. Cells are redrawn until all
//   free interior cells are reachable and every NPC has a reachable
//   neighbour; a door/NPC setup
//   that admits no such placement is discarded and drawn again from the
//   same stream.
// The door-only variant is a fixed 5x5 room with one green door on a random
// wall and no NPCs.
inline std::pair<WorldState, Observation> reset(const EnvConfig& config, std::uint64_t seed) {
  if (config.min_size < 5 || config.max_size < config.min_size || config.t_max < 1) {
    throw DomainError("invalid environment configuration");
  }
  Rng rng(seed);
  constexpr int kMaxLayouts = 1000;
  for (int layout = 0; layout < kMaxLayouts; ++layout) {
    WorldState s;
    s.config = config;
    s.seed = seed;
    detail::draw_layout(s, rng);
    if (!detail::place_entities(s, rng)) continue;
    s.rng = rng;
    auto obs = observe(s, {});
    return {std::move(s), std::move(obs)};
  }
  throw LayoutError("could not generate a connected layout");
}

inline StepResult step(WorldState& s, const Action& action) {
  if (s.status != Status::running) {
    throw IllegalTransitionError("step called on a finished episode");
  }
  ++s.t;
  double reward = 0.0;
  bool terminated = false;
  std::vector<HeardLine> heard_now;

  if (action.primitive) {
    switch (*action.primitive) {
      case Primitive::turn_left: s.agent_dir = turn_left(s.agent_dir); break;
      case Primitive::turn_right: s.agent_dir = turn_right(s.agent_dir); break;
      case Primitive::forward: {
        const Pos target = s.agent_pos + forward_vec(s.agent_dir);
        if (s.walkable(target)) s.agent_pos = target;
        break;
      }
      case Primitive::pickup:
      case Primitive::drop: break;
      case Primitive::toggle:
      case Primitive::done:
        s.status = Status::failure;
        terminated = true;
        break;
    }
  }

  if (!terminated && action.speech) {
    if (*action.speech == kOpenSesame && s.is_door_front(s.agent_pos)) {
      terminated = true;
      if (s.front_of(s.doors[s.correct_door]) == s.agent_pos) {
        s.status = Status::success;
        reward = extrinsic_reward(s.t, s.config.t_max);
      } else {
        s.status = Status::failure;
      }
    } else {
      NpcReplyContext ctx;
      ctx.heard = *action.speech;
      ctx.correct_color = s.correct_color();
      const std::string guide = s.true_guide_name();
      ctx.true_guide_name = guide;
      ctx.doors = s.doors;
      ctx.rng = &s.rng;
      for (const auto& npc : s.npcs) {
        ctx.speaker_adjacent = manhattan(npc.pos, s.agent_pos) == 1;
        if (auto line = npc_reply(npc, ctx)) heard_now.push_back(std::move(*line));
      }
    }
  }

  if (!terminated && s.t >= s.config.t_max) {
    s.status = Status::failure;
    terminated = true;
  }

  s.history.insert(s.history.end(), heard_now.begin(), heard_now.end());

  StepResult r;
  r.observation = observe(s, std::move(heard_now));
  r.reward = reward;
  r.done = terminated;
  r.info = {s.status == Status::success, s.t};
  return r;
}

inline CellCode encode_cell(const WorldState& s, Pos p) {
  if (!s.in_bounds(p)) return {cell_type::unseen, 0, 0};
  if (p == s.agent_pos) return {cell_type::agent, 0, 0};
  if (const int d = s.door_at(p); d >= 0) {
    return {cell_type::door, static_cast<int>(s.doors[d].color), 1};
  }
  if (s.on_boundary(p)) return {cell_type::wall, static_cast<int>(Color::grey), 0};
  if (const int n = s.npc_at(p); n >= 0) {
    const auto& npc = s.npcs[n];
    return {cell_type::npc, static_cast<int>(npc.color), npc.kind == NpcKind::wizard ? 0 : 1};
  }
  return {cell_type::floor, 0, 0};
}

inline View encode_view(const WorldState& s) {
  View v{};
  for (int row = 0; row < kViewSize; ++row) {
    for (int col = 0; col < kViewSize; ++col) {
      v[row][col] = encode_cell(s, view_to_world(s.agent_pos, s.agent_dir, row, col));
    }
  }
  return v;
}

inline char door_glyph(Color c) {
  constexpr std::array<char, kNumColors> glyphs{'r', 'g', 'b', 'p', 'y', 'a'};
  return glyphs[static_cast<int>(c)];
}

inline char agent_glyph(Dir d) {
  constexpr std::array<char, 4> glyphs{'^', '>', 'v', '<'};
  return glyphs[static_cast<int>(d)];
}

// One row of glyphs per grid row plus a status line.
// '#' wall, '.' floor, door = lowercase color initial (grey 'a'),
// 'W' wizard, 'G' guide, agent = ^ > v <.
inline std::string render_ascii(const WorldState& s) {
  std::ostringstream out;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Pos p{x, y};
      char c = '.';
      if (p == s.agent_pos) {
        c = agent_glyph(s.agent_dir);
      } else if (const int d = s.door_at(p); d >= 0) {
        c = door_glyph(s.doors[d].color);
      } else if (s.on_boundary(p)) {
        c = '#';
      } else if (const int n = s.npc_at(p); n >= 0) {
        c = s.npcs[n].kind == NpcKind::wizard ? 'W' : 'G';
      }
      out << c;
    }
    out << '\n';
  }
  const char* status = s.status == Status::running ? "running"
                       : s.status == Status::success ? "success"
                                                     : "failure";
  out << "t=" << s.t << '/' << s.config.t_max << " status=" << status << '\n';
  return out.str();
}

// Owning convenience wrapper around reset/step.
class Env {
 public:
  explicit Env(EnvConfig config = {}) : config_(config) {}

  Observation reset(std::uint64_t seed) {
    auto [s, obs] = talkitout::reset(config_, seed);
    state_ = std::move(s);
    return obs;
  }

  StepResult step(const Action& a) { return talkitout::step(state_, a); }

  [[nodiscard]] const WorldState& state() const { return state_; }
  [[nodiscard]] const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  WorldState state_;
};

}  // namespace talkitout
