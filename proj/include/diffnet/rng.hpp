#pragma once

#include <cmath>
#include <cstdint>

namespace diffnet {

/// Mixes one 64-bit word into a state (splitmix64 finalizer). Used both as
/// the seeding chain for Xoshiro256pp and to derive independent substream
/// keys from (master, trial, node, stream) tuples.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a substream key so that every (trial, node, stream) triple gets a
/// statistically independent generator from one master seed. Trials can then
/// run in any order (or in parallel) and still draw identical sequences.
inline std::uint64_t substream_key(std::uint64_t master, std::uint64_t trial,
                                   std::uint64_t node, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t k = splitmix64(s);
  s ^= trial * 0xd1342543de82ef95ULL;
  k ^= splitmix64(s);
  s ^= node * 0xaf251af3b0f025b5ULL;
  k ^= splitmix64(s);
  s ^= stream * 0x9e3779b97f4a7c15ULL;
  k ^= splitmix64(s);
  return k;
}

/// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
/// bit-stable across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1, so logs and
  /// tangents of it are finite.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential with unit rate.
  double exponential() { return -std::log(uniform01()); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Stream tags for substream derivation. Scenario-level streams (not tied to
/// a trial or node) use kScenarioTag in the trial slot.
namespace stream {
constexpr std::uint64_t kRegressor = 1;
constexpr std::uint64_t kNoise = 2;
constexpr std::uint64_t kCluster = 3;
constexpr std::uint64_t kSchedule = 4;
constexpr std::uint64_t kTrueVector = 5;
constexpr std::uint64_t kProfile = 6;
constexpr std::uint64_t kTopology = 7;
constexpr std::uint64_t kScenarioTag = 0xffffffffULL;
}  // namespace stream

inline Rng make_stream(std::uint64_t master, std::uint64_t trial,
                       std::uint64_t node, std::uint64_t stream) {
  return Rng(substream_key(master, trial, node, stream));
}

}  // namespace diffnet
