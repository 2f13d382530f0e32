#pragma once

// Portable seeded generator.
//
// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not, so bounded integers and reals are derived here with
// fixed algorithms. The same seed gives the same draws on every conforming
// implementation.

#include <cassert>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace talkitout {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n) by rejection on the top of the 64-bit range.
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    assert(lo <= hi);
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform real in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool coin() { return below(2) == 1; }

  // In-place Fisher-Yates; only the first `k` slots are drawn.
  template <typename T>
  void partial_shuffle(std::span<T> items, std::size_t k) {
    for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
      const auto j = i + static_cast<std::size_t>(below(items.size() - i));
      std::swap(items[i], items[j]);
    }
  }

  // Independent child stream, e.g. one per episode of a batch.
  Rng split() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ULL); }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace talkitout
