#pragma once

// Scripted NPC replies. NPCs speak only when spoken to: the agent must be
// adjacent and must ask "Where is the exit.".

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "talkitout/grammar.hpp"
#include "talkitout/rng.hpp"
#include "talkitout/state.hpp"

namespace talkitout {

struct NpcReplyContext {
  Utterance heard;
  bool speaker_adjacent = false;
  Color correct_color = Color::red;
  std::string_view true_guide_name;
  std::span<const Door> doors;
  Rng* rng = nullptr;  // only the liar draws from it

  [[nodiscard]] bool triggered() const { return speaker_adjacent && heard == kWhereIsTheExit; }
};

inline std::string wizard_text(std::string_view guide_name) {
  return "Ask " + std::string(guide_name) + ".";
}

inline std::string guide_text(Color c) { return "Go to the " + std::string(to_string(c)) + " door."; }

// Inverse of wizard_text(); nullopt on anything else.
inline std::optional<std::string> parse_wizard_text(std::string_view text) {
  constexpr std::string_view prefix = "Ask ";
  if (!text.starts_with(prefix) || !text.ends_with(".") || text.size() <= prefix.size() + 1) {
    return std::nullopt;
  }
  return std::string(text.substr(prefix.size(), text.size() - prefix.size() - 1));
}

// Inverse of guide_text(); nullopt on anything else.
inline std::optional<Color> parse_guide_text(std::string_view text) {
  constexpr std::string_view prefix = "Go to the ";
  constexpr std::string_view suffix = " door.";
  if (!text.starts_with(prefix) || !text.ends_with(suffix)) return std::nullopt;
  if (text.size() < prefix.size() + suffix.size()) return std::nullopt;
  return parse_color(text.substr(prefix.size(), text.size() - prefix.size() - suffix.size()));
}

inline std::optional<HeardLine> wizard_reply(const NpcReplyContext& ctx) {
  if (!ctx.triggered()) return std::nullopt;
  return HeardLine{std::string(kWizardName), wizard_text(ctx.true_guide_name)};
}

inline std::optional<HeardLine> true_guide_reply(const NpcReplyContext& ctx, std::string_view name) {
  if (!ctx.triggered()) return std::nullopt;
  return HeardLine{std::string(name), guide_text(ctx.correct_color)};
}

// Uniform over the door colors other than the correct one, redrawn per ask.
inline std::optional<HeardLine> false_guide_reply(const NpcReplyContext& ctx, std::string_view name) {
  if (!ctx.triggered()) return std::nullopt;
  std::array<Color, 8> wrong{};
  std::size_t n = 0;
  for (const auto& d : ctx.doors) {
    if (d.color != ctx.correct_color && n < wrong.size()) wrong[n++] = d.color;
  }
  if (n == 0 || ctx.rng == nullptr) throw DomainError("false guide has no wrong door to name");
  const auto pick = wrong[ctx.rng->below(n)];
  return HeardLine{std::string(name), guide_text(pick)};
}

inline std::optional<HeardLine> npc_reply(const Npc& npc, const NpcReplyContext& ctx) {
  switch (npc.kind) {
    case NpcKind::wizard: return wizard_reply(ctx);
    case NpcKind::true_guide: return true_guide_reply(ctx, npc.name);
    case NpcKind::false_guide: return false_guide_reply(ctx, npc.name);
  }
  return std::nullopt;
}

}  // namespace talkitout
