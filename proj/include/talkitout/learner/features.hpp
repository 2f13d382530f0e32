#pragma once

// Flat input encoding for the reference learner.
//
// view:     per cell one-hot type (6) + one-hot color (6) + one-hot extra (2)
// language: 64 (speaker, content) pair slots + 3 speaker slots, binary
//           presence over everything heard so far this episode

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "talkitout/npc.hpp"
#include "talkitout/state.hpp"

namespace talkitout::learner {

inline constexpr std::array<int, 6> kTypeIds = {cell_type::unseen, cell_type::floor, cell_type::wall,
                                                cell_type::door,   cell_type::agent, cell_type::npc};
inline constexpr int kCellFeatures = 6 + kNumColors + 2;
inline constexpr int kViewFeatures = kViewSize * kViewSize * kCellFeatures;
inline constexpr int kContentSlots = 64;
inline constexpr int kSpeakerSlots = 3;
inline constexpr int kLangFeatures = kContentSlots + kSpeakerSlots;
inline constexpr int kInputSize = kViewFeatures + kLangFeatures;

// Wizard = 0, Jack = 1, John = 2.
inline std::optional<int> speaker_id(std::string_view speaker) {
  if (speaker == kWizardName) return 0;
  if (speaker == kGuideNames[0]) return 1;
  if (speaker == kGuideNames[1]) return 2;
  return std::nullopt;
}

// "Ask Jack." = 0, "Ask John." = 1, "Go to the <c> door." = 2 + color.
inline std::optional<int> content_id(std::string_view text) {
  if (auto name = parse_wizard_text(text)) {
    if (*name == kGuideNames[0]) return 0;
    if (*name == kGuideNames[1]) return 1;
    return std::nullopt;
  }
  if (auto c = parse_guide_text(text)) return 2 + static_cast<int>(*c);
  return std::nullopt;
}

// Accumulated bag of heard lines for one episode.
class LanguageBag {
 public:
  void reset() { slots_.fill(0.0); }

  void add(const HeardLine& line) {
    const auto s = speaker_id(line.speaker);
    if (!s) return;
    slots_[kContentSlots + *s] = 1.0;
    if (const auto c = content_id(line.text)) slots_[*s * 8 + *c] = 1.0;
  }

  [[nodiscard]] const std::array<double, kLangFeatures>& slots() const { return slots_; }

 private:
  std::array<double, kLangFeatures> slots_{};
};

inline void encode_features(const View& view, const LanguageBag& bag, Eigen::Ref<Eigen::VectorXd> out) {
  out.setZero();
  int base = 0;
  for (const auto& row : view) {
    for (const auto& cell : row) {
      for (int i = 0; i < 6; ++i) {
        if (kTypeIds[i] == cell.type) out[base + i] = 1.0;
      }
      if (cell.color >= 0 && cell.color < kNumColors) out[base + 6 + cell.color] = 1.0;
      if (cell.extra == 0 || cell.extra == 1) out[base + 12 + cell.extra] = 1.0;
      base += kCellFeatures;
    }
  }
  for (int i = 0; i < kLangFeatures; ++i) out[kViewFeatures + i] = bag.slots()[i];
}

}  // namespace talkitout::learner
