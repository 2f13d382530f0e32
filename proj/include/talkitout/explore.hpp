#pragma once

// Episodic count-based novelty bonus on heard language: C / (N + 1)^M,
// with N the number of earlier hearings of the same line this episode.

#include <cmath>
#include <span>
#include <string>
#include <unordered_map>

#include "talkitout/errors.hpp"

namespace talkitout {

struct BonusConfig {
  double C = 0.125;
  double M = 50.0;
};

inline void validate(const BonusConfig& cfg) {
  if (!(cfg.C >= 0.0) || !(cfg.M >= 0.0)) throw DomainError("bonus C and M must be non-negative");
}

// Keys are full heard lines including the speaker prefix.
class EpisodicLangCounter {
 public:
  void reset() { counts_.clear(); }

  [[nodiscard]] long count(const std::string& line) const {
    const auto it = counts_.find(line);
    return it == counts_.end() ? 0 : it->second;
  }

  long observe(const std::string& line) { return counts_[line]++; }

  [[nodiscard]] std::size_t distinct() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, long> counts_;
};

inline double bonus(const std::string& line, EpisodicLangCounter& counter, const BonusConfig& cfg) {
  const long n = counter.observe(line);
  return cfg.C / std::pow(static_cast<double>(n) + 1.0, cfg.M);
}

inline double intrinsic_reward(std::span<const std::string> lines, EpisodicLangCounter& counter,
                               const BonusConfig& cfg) {
  double total = 0.0;
  for (const auto& l : lines) total += bonus(l, counter, cfg);
  return total;
}

inline double shaped_reward(double extrinsic, std::span<const std::string> lines,
                            EpisodicLangCounter& counter, const BonusConfig& cfg) {
  return extrinsic + intrinsic_reward(lines, counter, cfg);
}

}  // namespace talkitout
