#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace rumorlens {

/// Seeded pseudo-random generator with a pinned algorithm: xoshiro256**
/// (Blackman & Vigna), state filled from the seed by four SplitMix64 steps.
/// The stream depends only on the seed, never on the platform or the
/// standard library, so every distribution below is implemented here rather
/// than taken from <random>.
///
/// Reference stream for seed 42 (first three next_u64 values):
///   0x15780b2e0c2ec716, 0x6104d9866d113a7e, 0xae17533239e499a1
///
/// Copying an Rng forks the stream: both copies produce the same values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [0, bound), bound >= 1; unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// True with probability p.
  bool bernoulli(double p) noexcept;

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

/// One SplitMix64 step; also used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace rumorlens
