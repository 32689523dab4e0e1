#pragma once

#include <array>
#include <cstdint>

namespace meanmax {

namespace detail {

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultSeed = 20200518;

/// Seeded, splittable random source with a fixed algorithm.
///
/// Generator: xoshiro256**. State: four words produced by SplitMix64 started at
///   mix64(seed ^ 0x243F6A8885A308D3) ^ mix64(stream + 0x13198A2E03707344).
/// Child streams keep the seed and take stream index
///   mix64(stream * 0x9E3779B97F4A7C15 + key + 1),
/// which depends only on (stream, key), never on how much of the parent has
/// been consumed. Same (seed, stream) gives the same sequence everywhere.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = kDefaultSeed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {
    std::uint64_t sm = detail::mix64(seed ^ 0x243F6A8885A308D3ULL) ^
                       detail::mix64(stream + 0x13198A2E03707344ULL);
    for (auto& word : state_) {
      sm += 0x9E3779B97F4A7C15ULL;
      word = detail::mix64(sm);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  RngStream child(std::uint64_t key) const noexcept {
    return RngStream(seed_, detail::mix64(stream_ * 0x9E3779B97F4A7C15ULL + key + 1));
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), unbiased (Lemire's multiply-and-reject).
  std::uint64_t uniform_index(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace meanmax
