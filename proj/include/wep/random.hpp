// Seeded random streams. Every path, replication and randomizer gets its own
// generator derived from (seed, stream tag, index), so results never depend on
// how work is split across threads.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace wep {

/// SplitMix64 finalizer; used for seed derivation only.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream tags keep independent uses of one user seed apart.
enum class Stream : std::uint64_t {
  paths = 1,
  randomizer = 2,
  limit_field = 3,
  calibration = 4,
  replication = 5,
  envelope = 6,
  local_ball = 7,
  draws = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream tag, std::uint64_t index,
                                    std::uint64_t sub = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(tag));
  h = mix64(h ^ index);
  return mix64(h ^ sub);
}

/// xoshiro256** (Blackman & Vigna). Small state makes it cheap to seed one
/// generator per path.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& s : state_) {
      z += 0x9e3779b97f4a7c15ULL;
      s = mix64(z);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4]{};
};

/// Generator plus a standard normal source. The normal distribution object
/// caches a spare deviate, so it lives alongside its engine.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, Stream tag, std::uint64_t index, std::uint64_t sub = 0)
      : engine_(derive_seed(seed, tag, index, sub)) {}

  double uniform() { return engine_.uniform(); }
  double normal() { return normal_(engine_); }
  Xoshiro256& engine() { return engine_; }

 private:
  Xoshiro256 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace wep
