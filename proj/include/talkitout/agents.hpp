#pragma once

// Scripted agents: uniform random, a privileged oracle that reads the hidden
// correct door, and a social oracle that only sees observations.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "talkitout/errors.hpp"
#include "talkitout/grammar.hpp"
#include "talkitout/npc.hpp"
#include "talkitout/pathfind.hpp"
#include "talkitout/rng.hpp"
#include "talkitout/state.hpp"

namespace talkitout {

class Agent {
 public:
  virtual ~Agent() = default;

  virtual void reset(std::uint64_t episode_seed) = 0;
  virtual Action act(const Observation& obs) = 0;

  // Only agents answering true are shown the hidden state, before each act().
  [[nodiscard]] virtual bool needs_state() const { return false; }
  virtual void observe_state(const WorldState&) {}
};

// Uniform over the 8 x 65 joint space (7 primitives or none, 64 utterances or none).
inline Action random_act(Rng& rng) {
  Action a;
  const auto p = rng.below(kNumPrimitives + 1);
  if (p < kNumPrimitives) a.primitive = static_cast<Primitive>(p);
  const auto s = rng.below(kNumUtterances + 1);
  if (s < kNumUtterances) a.speech = Utterance::from_flat(static_cast<int>(s));
  return a;
}

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed = 0) : base_seed_(seed) {}

  void reset(std::uint64_t episode_seed) override {
    rng_ = Rng(base_seed_ ^ (episode_seed * 0x2545f4914f6cdd1dULL) ^ 0x5851f42d4c957f2dULL);
  }
  Action act(const Observation&) override { return random_act(rng_); }

 private:
  std::uint64_t base_seed_;
  Rng rng_;
};

// Pair the last move of a plan with `speech` so the utterance is spoken on arrival.
inline Action finish_plan(const std::vector<Primitive>& plan, Utterance speech) {
  if (plan.empty()) return {std::nullopt, speech};
  if (plan.size() == 1) return {plan.front(), speech};
  return {plan.front(), std::nullopt};
}

inline Action privileged_oracle_act(const WorldState& s) {
  const Pos goal = s.front_of(s.doors.at(s.correct_door));
  const auto plan = plan_path(
      Pose{s.agent_pos, s.agent_dir}, [&](Pos p) { return s.walkable(p); },
      [&](const Pose& p) { return p.pos == goal; });
  if (!plan) throw LayoutError("privileged oracle: correct door unreachable");
  return finish_plan(*plan, kOpenSesame);
}

class PrivilegedOracle final : public Agent {
 public:
  void reset(std::uint64_t) override { state_ = nullptr; }
  [[nodiscard]] bool needs_state() const override { return true; }
  void observe_state(const WorldState& s) override { state_ = &s; }
  Action act(const Observation&) override {
    if (state_ == nullptr) throw Error("privileged oracle acted without state");
    return privileged_oracle_act(*state_);
  }

 private:
  const WorldState* state_ = nullptr;
};

enum class OraclePhase { seek_wizard, ask_wizard, seek_guide, ask_guide, seek_door, say_passphrase };

// Everything the social oracle knows, in its own frame: the start cell is the
// origin and the start heading is north.
struct OracleMemory {
  OraclePhase phase = OraclePhase::seek_wizard;
  std::optional<std::string> target_name;
  std::optional<Color> target_color;
  std::set<Pos> visited_guides;
  std::vector<Pos> path;

  Pose pose;
  std::optional<Primitive> last_move;
  std::map<Pos, CellCode> map;
  std::vector<Pos> discovery_order;  // NPC cells, first-seen order
  std::map<std::string, Color> guide_answers;
  std::vector<Utterance> spoken;
};

namespace detail {

inline bool known_floor(const OracleMemory& m, Pos p) {
  const auto it = m.map.find(p);
  return it != m.map.end() && (it->second.type == cell_type::floor || it->second.type == cell_type::agent);
}

inline void absorb_view(OracleMemory& m, const View& v) {
  for (int row = 0; row < kViewSize; ++row) {
    for (int col = 0; col < kViewSize; ++col) {
      const Pos p = view_to_world(m.pose.pos, m.pose.dir, row, col);
      CellCode c = v[row][col];
      if (c.type == cell_type::agent) c = {cell_type::floor, 0, 0};
      if (c.type == cell_type::npc && !m.map.contains(p)) m.discovery_order.push_back(p);
      m.map[p] = c;
    }
  }
}

inline bool frontier_visible(const OracleMemory& m, const Pose& pose) {
  for (int row = 0; row < kViewSize; ++row) {
    for (int col = 0; col < kViewSize; ++col) {
      const Pos p = view_to_world(pose.pos, pose.dir, row, col);
      if (m.map.contains(p)) continue;
      for (const auto& d : kNeighbors) {
        if (known_floor(m, p + d)) return true;
      }
    }
  }
  return false;
}

inline std::optional<std::vector<Primitive>> plan_in_memory(const OracleMemory& m,
                                                            const auto& is_goal) {
  return plan_path(m.pose, [&](Pos p) { return known_floor(m, p); }, is_goal);
}

inline std::optional<std::vector<Primitive>> plan_to_adjacent(const OracleMemory& m, Pos target) {
  return plan_in_memory(m, [&](const Pose& p) { return manhattan(p.pos, target) == 1; });
}

inline Action explore_step(OracleMemory& m) {
  const auto plan = plan_in_memory(m, [&](const Pose& p) { return frontier_visible(m, p); });
  if (plan && !plan->empty()) {
    m.path = cell_path(m.pose, *plan);
    return {plan->front(), std::nullopt};
  }
  return {Primitive::turn_left, std::nullopt};
}

inline void absorb_heard(OracleMemory& m, const std::vector<HeardLine>& heard) {
  for (const auto& line : heard) {
    if (line.speaker == kWizardName) {
      if (auto name = parse_wizard_text(line.text)) m.target_name = *name;
    } else if (auto color = parse_guide_text(line.text)) {
      m.guide_answers[line.speaker] = *color;
    }
  }
  if (m.target_name && !m.target_color) {
    if (const auto it = m.guide_answers.find(*m.target_name); it != m.guide_answers.end()) {
      m.target_color = it->second;
    }
  }
}

}  // namespace detail

// One decision of the social oracle. Uses only `obs` and `memory`.
inline Action social_oracle_act(const Observation& obs, OracleMemory& m) {
  using namespace detail;
  if (m.last_move) m.pose = apply(m.pose, *m.last_move);
  absorb_view(m, obs.image);
  absorb_heard(m, obs.heard);

  if (m.target_color) {
    m.phase = OraclePhase::seek_door;
  } else if (m.target_name) {
    if (m.phase == OraclePhase::ask_guide) m.phase = OraclePhase::seek_guide;
    if (m.phase < OraclePhase::seek_guide) m.phase = OraclePhase::seek_guide;
  } else if (m.phase == OraclePhase::ask_wizard) {
    m.phase = OraclePhase::seek_wizard;  // asked but no answer: try again
  }

  Action action{Primitive::turn_left, std::nullopt};
  switch (m.phase) {
    case OraclePhase::seek_wizard:
    case OraclePhase::ask_wizard: {
      std::optional<Pos> wizard;
      for (const auto& p : m.discovery_order) {
        const auto& c = m.map.at(p);
        if (c.type == cell_type::npc && c.extra == 0) wizard = p;
      }
      if (!wizard) {
        action = explore_step(m);
        break;
      }
      const auto plan = plan_to_adjacent(m, *wizard);
      if (!plan) {
        action = explore_step(m);
        break;
      }
      m.path = cell_path(m.pose, *plan);
      action = finish_plan(*plan, kWhereIsTheExit);
      if (plan->size() <= 1) m.phase = OraclePhase::ask_wizard;
      break;
    }
    case OraclePhase::seek_guide:
    case OraclePhase::ask_guide: {
      std::optional<std::vector<Primitive>> best;
      Pos best_guide{};
      for (const auto& p : m.discovery_order) {
        const auto& c = m.map.at(p);
        if (c.type != cell_type::npc || c.extra != 1 || m.visited_guides.contains(p)) continue;
        auto plan = plan_to_adjacent(m, p);
        if (plan && (!best || plan->size() < best->size())) {
          best = std::move(plan);
          best_guide = p;
        }
      }
      if (!best) {
        action = explore_step(m);
        break;
      }
      m.path = cell_path(m.pose, *best);
      action = finish_plan(*best, kWhereIsTheExit);
      if (best->size() <= 1) {
        m.visited_guides.insert(best_guide);
        m.phase = OraclePhase::ask_guide;
      }
      break;
    }
    case OraclePhase::seek_door:
    case OraclePhase::say_passphrase: {
      std::optional<Pos> front;
      for (const auto& [p, c] : m.map) {
        if (c.type != cell_type::door || c.color != static_cast<int>(*m.target_color)) continue;
        for (const auto& d : kNeighbors) {
          if (known_floor(m, p + d)) front = p + d;
        }
      }
      if (!front) {
        action = explore_step(m);
        break;
      }
      const auto plan = plan_in_memory(m, [&](const Pose& p) { return p.pos == *front; });
      if (!plan) {
        action = explore_step(m);
        break;
      }
      m.path = cell_path(m.pose, *plan);
      action = finish_plan(*plan, kOpenSesame);
      if (plan->size() <= 1) m.phase = OraclePhase::say_passphrase;
      break;
    }
  }

  m.last_move = action.primitive;
  if (action.speech) m.spoken.push_back(*action.speech);
  return action;
}

class SocialOracle final : public Agent {
 public:
  void reset(std::uint64_t) override { memory_ = {}; }
  Action act(const Observation& obs) override { return social_oracle_act(obs, memory_); }
  [[nodiscard]] const OracleMemory& memory() const { return memory_; }

 private:
  OracleMemory memory_;
};

// Always emits `done`; useful as a degenerate baseline.
class DoneAgent final : public Agent {
 public:
  void reset(std::uint64_t) override {}
  Action act(const Observation&) override { return {Primitive::done, std::nullopt}; }
};

inline std::unique_ptr<Agent> make_scripted_agent(const std::string& name, std::uint64_t seed = 0) {
  if (name == "random") return std::make_unique<RandomAgent>(seed);
  if (name == "oracle-privileged") return std::make_unique<PrivilegedOracle>();
  if (name == "oracle-social") return std::make_unique<SocialOracle>();
  if (name == "done") return std::make_unique<DoneAgent>();
  throw DomainError("unknown agent: " + name);
}

}  // namespace talkitout
