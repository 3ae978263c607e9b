#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace osnr {

/// SplitMix64 finalizer; decorrelates nearby seeds before they feed MT19937.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a label; used to derive independent substreams by role
/// ("sketch", "advance", ...) from one run seed.
inline std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// A seeded random stream. Substreams derived by label depend only on
/// (seed, label), never on how many draws the parent has consumed, so the
/// schedule of one consumer cannot perturb another.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : seed_(seed), eng_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return eng_; }

  SeedStream derive(std::string_view label) const {
    return SeedStream(mix64(seed_ ^ label_hash(label)));
  }

  double normal() { return normal_(eng_); }

  /// Unbiased integer in [0, n) via rejection; n >= 1.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace osnr
