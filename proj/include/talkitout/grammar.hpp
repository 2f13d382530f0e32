#pragma once

// Templated agent language: 4 templates x 16 nouns = 64 sentences.

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "talkitout/errors.hpp"

namespace talkitout {

inline constexpr int kNumTemplates = 4;
inline constexpr int kNumNouns = 16;
inline constexpr int kNumUtterances = kNumTemplates * kNumNouns;

inline constexpr std::array<std::string_view, kNumTemplates> kTemplates = {
    "Where is <noun>.",
    "Open <noun>.",
    "Close <noun>.",
    "What is <noun>.",
};

// "oven" has no article; kept as-is.
inline constexpr std::array<std::string_view, kNumNouns> kNouns = {
    "sesame",     "the exit",   "the wall",   "the floor",
    "the ceiling", "the window", "the entrance", "the closet",
    "the drawer", "the fridge", "oven",       "the lamp",
    "the trash can", "the chair", "the bed",  "the sofa",
};

inline constexpr std::string_view kNounSlot = "<noun>";

struct Utterance {
  int template_index = 0;
  int noun_index = 0;

  constexpr auto operator<=>(const Utterance&) const = default;

  // Dense index in template-major, noun-minor order.
  [[nodiscard]] constexpr int flat() const { return template_index * kNumNouns + noun_index; }
  static constexpr Utterance from_flat(int i) { return {i / kNumNouns, i % kNumNouns}; }
};

inline constexpr Utterance kWhereIsTheExit{0, 1};
inline constexpr Utterance kOpenSesame{1, 0};

[[nodiscard]] constexpr bool valid(const Utterance& u) {
  return u.template_index >= 0 && u.template_index < kNumTemplates && u.noun_index >= 0 &&
         u.noun_index < kNumNouns;
}

inline std::string render(const Utterance& u) {
  if (!valid(u)) {
    throw InvalidIndexError("utterance index out of range: (" + std::to_string(u.template_index) +
                            ", " + std::to_string(u.noun_index) + ")");
  }
  std::string out(kTemplates[u.template_index]);
  out.replace(out.find(kNounSlot), kNounSlot.size(), kNouns[u.noun_index]);
  return out;
}

namespace detail {

inline const std::array<std::string, kNumUtterances>& rendered_table() {
  static const auto table = [] {
    std::array<std::string, kNumUtterances> t;
    for (int i = 0; i < kNumUtterances; ++i) t[i] = render(Utterance::from_flat(i));
    return t;
  }();
  return table;
}

}  // namespace detail

// Exact inverse of render(); anything outside the 64-sentence image is rejected.
inline std::optional<Utterance> try_parse(std::string_view line) {
  const auto& table = detail::rendered_table();
  for (int i = 0; i < kNumUtterances; ++i) {
    if (table[i] == line) return Utterance::from_flat(i);
  }
  return std::nullopt;
}

inline Utterance parse(std::string_view line) {
  if (auto u = try_parse(line)) return *u;
  throw ParseError("not a sentence of the template grammar: \"" + std::string(line) + "\"");
}

inline std::vector<std::string> vocabulary() {
  const auto& table = detail::rendered_table();
  return {table.begin(), table.end()};
}

// A line on the language channel, serialized as "<speaker>: <text>".
struct HeardLine {
  std::string speaker;
  std::string text;

  bool operator==(const HeardLine&) const = default;

  [[nodiscard]] std::string serialize() const { return speaker + ": " + text; }

  static HeardLine deserialize(std::string_view line) {
    const auto sep = line.find(": ");
    if (sep == std::string_view::npos || sep == 0) {
      throw ParseError("heard line lacks a speaker prefix: \"" + std::string(line) + "\"");
    }
    return {std::string(line.substr(0, sep)), std::string(line.substr(sep + 2))};
  }
};

}  // namespace talkitout
