#pragma once

// Core value types of the simulator: geometry, entities, actions, episode state.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "talkitout/errors.hpp"
#include "talkitout/grammar.hpp"
#include "talkitout/rng.hpp"

namespace talkitout {

enum class Variant { original, no_liar, door_only };
enum class HistoryMode { current, full_history };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::no_liar: return "no-liar";
    case Variant::door_only: return "door-only";
  }
  return "?";
}

// Accepts both dash and underscore spellings.
inline Variant parse_variant(std::string_view s) {
  if (s == "original") return Variant::original;
  if (s == "no-liar" || s == "no_liar") return Variant::no_liar;
  if (s == "door-only" || s == "door_only") return Variant::door_only;
  throw ParseError("unknown variant: " + std::string(s));
}

inline std::string_view to_string(HistoryMode m) {
  return m == HistoryMode::current ? "current" : "full_history";
}

inline HistoryMode parse_history_mode(std::string_view s) {
  if (s == "current") return HistoryMode::current;
  if (s == "full_history" || s == "full-history") return HistoryMode::full_history;
  throw ParseError("unknown history mode: " + std::string(s));
}

// Ids double as the color channel of the view encoding.
enum class Color : int { red = 0, green = 1, blue = 2, purple = 3, yellow = 4, grey = 5 };
inline constexpr int kNumColors = 6;
inline constexpr std::array<std::string_view, kNumColors> kColorNames = {
    "red", "green", "blue", "purple", "yellow", "grey"};

inline std::string_view to_string(Color c) { return kColorNames[static_cast<int>(c)]; }

inline std::optional<Color> parse_color(std::string_view s) {
  for (int i = 0; i < kNumColors; ++i) {
    if (kColorNames[i] == s) return static_cast<Color>(i);
  }
  return std::nullopt;
}

struct Pos {
  int x = 0;
  int y = 0;

  constexpr auto operator<=>(const Pos&) const = default;
  constexpr Pos operator+(const Pos& o) const { return {x + o.x, y + o.y}; }
  constexpr Pos operator-(const Pos& o) const { return {x - o.x, y - o.y}; }
  constexpr Pos operator*(int k) const { return {x * k, y * k}; }
};

constexpr int manhattan(Pos a, Pos b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

// y grows downwards; north is up.
enum class Dir : int { north = 0, east = 1, south = 2, west = 3 };

constexpr Pos forward_vec(Dir d) {
  constexpr std::array<Pos, 4> v{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};
  return v[static_cast<int>(d)];
}
constexpr Dir turn_left(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 3) % 4); }
constexpr Dir turn_right(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 1) % 4); }
constexpr Pos right_vec(Dir d) { return forward_vec(turn_right(d)); }

inline constexpr std::array<Pos, 4> kNeighbors{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

// Primitive action ids as used on the wire; -1 is the undefined slot.
enum class Primitive : int {
  turn_left = 0,
  turn_right = 1,
  forward = 2,
  pickup = 3,
  drop = 4,
  toggle = 5,
  done = 6,
};
inline constexpr int kNumPrimitives = 7;

struct Action {
  std::optional<Primitive> primitive;
  std::optional<Utterance> speech;

  bool operator==(const Action&) const = default;

  // [primitive, template, noun] with -1 for undefined slots.
  [[nodiscard]] std::array<int, 3> to_triple() const {
    return {primitive ? static_cast<int>(*primitive) : -1,
            speech ? speech->template_index : -1, speech ? speech->noun_index : -1};
  }

  // Template and noun must be jointly defined or jointly undefined.
  static Action from_triple(const std::array<int, 3>& t) {
    Action a;
    if (t[0] != -1) {
      if (t[0] < 0 || t[0] >= kNumPrimitives) {
        throw ActionError("primitive slot out of range: " + std::to_string(t[0]));
      }
      a.primitive = static_cast<Primitive>(t[0]);
    }
    if ((t[1] == -1) != (t[2] == -1)) {
      throw ActionError("template and noun slots must be both defined or both undefined");
    }
    if (t[1] != -1) {
      Utterance u{t[1], t[2]};
      if (!valid(u)) throw ActionError("speech slot out of range");
      a.speech = u;
    }
    return a;
  }
};

struct Door {
  Pos pos;
  Color color = Color::red;
  bool operator==(const Door&) const = default;
};

enum class NpcKind { wizard, true_guide, false_guide };

struct Npc {
  Pos pos;
  Color color = Color::red;
  NpcKind kind = NpcKind::wizard;
  std::string name;
  bool operator==(const Npc&) const = default;
};

inline constexpr std::string_view kWizardName = "Wizard";
inline constexpr std::array<std::string_view, 2> kGuideNames = {"Jack", "John"};

struct EnvConfig {
  Variant variant = Variant::original;
  int min_size = 5;
  int max_size = 8;
  int num_doors = 4;
  int t_max = 40;
  HistoryMode history_mode = HistoryMode::current;

  bool operator==(const EnvConfig&) const = default;
};

enum class Status { running, success, failure };

struct WorldState {
  EnvConfig config;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  std::vector<Door> doors;
  std::vector<Npc> npcs;
  Pos agent_pos;
  Dir agent_dir = Dir::north;
  int t = 0;
  int correct_door = 0;
  int true_guide = -1;  // npc index, -1 when there are no guides
  Status status = Status::running;
  std::vector<HeardLine> history;
  Rng rng;

  bool operator==(const WorldState&) const = default;

  [[nodiscard]] bool in_bounds(Pos p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
  [[nodiscard]] bool on_boundary(Pos p) const {
    return p.x == 0 || p.y == 0 || p.x == width - 1 || p.y == height - 1;
  }
  [[nodiscard]] bool is_interior(Pos p) const { return in_bounds(p) && !on_boundary(p); }

  [[nodiscard]] int door_at(Pos p) const {
    for (std::size_t i = 0; i < doors.size(); ++i) {
      if (doors[i].pos == p) return static_cast<int>(i);
    }
    return -1;
  }
  [[nodiscard]] int npc_at(Pos p) const {
    for (std::size_t i = 0; i < npcs.size(); ++i) {
      if (npcs[i].pos == p) return static_cast<int>(i);
    }
    return -1;
  }
  [[nodiscard]] bool is_wall(Pos p) const { return in_bounds(p) && on_boundary(p) && door_at(p) < 0; }

  // Interior floor the agent may enter.
  [[nodiscard]] bool walkable(Pos p) const { return is_interior(p) && npc_at(p) < 0; }

  // The interior cell orthogonally adjacent to a boundary door.
  [[nodiscard]] Pos front_of(const Door& d) const {
    if (d.pos.y == 0) return {d.pos.x, 1};
    if (d.pos.y == height - 1) return {d.pos.x, height - 2};
    if (d.pos.x == 0) return {1, d.pos.y};
    return {width - 2, d.pos.y};
  }

  [[nodiscard]] bool is_door_front(Pos p) const {
    for (const auto& d : doors) {
      if (front_of(d) == p) return true;
    }
    return false;
  }

  [[nodiscard]] Color correct_color() const { return doors.at(correct_door).color; }

  [[nodiscard]] std::string true_guide_name() const {
    return true_guide >= 0 ? npcs.at(true_guide).name : std::string{};
  }
};

// One cell of the egocentric view: (object type, color, extra).
struct CellCode {
  int type = 0;
  int color = 0;
  int extra = 0;
  constexpr auto operator<=>(const CellCode&) const = default;
};

namespace cell_type {
inline constexpr int unseen = 0;
inline constexpr int floor = 1;
inline constexpr int wall = 2;
inline constexpr int door = 4;
inline constexpr int agent = 10;
inline constexpr int npc = 11;
}  // namespace cell_type

inline constexpr int kViewSize = 7;

// view[row][col]; row 0 is farthest ahead, the agent sits at row 6, col 3.
using View = std::array<std::array<CellCode, kViewSize>, kViewSize>;

inline constexpr int kAgentViewRow = kViewSize - 1;
inline constexpr int kAgentViewCol = kViewSize / 2;

// World cell shown at view (row, col) for an agent at `pos` facing `dir`.
constexpr Pos view_to_world(Pos pos, Dir dir, int row, int col) {
  return pos + forward_vec(dir) * (kAgentViewRow - row) + right_vec(dir) * (col - kAgentViewCol);
}

struct Observation {
  View image{};
  std::vector<HeardLine> heard;
  std::string heard_text;
  bool operator==(const Observation&) const = default;
};

struct StepInfo {
  bool success = false;
  int t = 0;
  bool operator==(const StepInfo&) const = default;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
  bool operator==(const StepResult&) const = default;
};

}  // namespace talkitout
