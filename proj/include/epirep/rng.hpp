#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace epirep {

/// Engine phases that own a keyed random sub-stream.
enum class Phase : std::uint64_t {
  Placement = 1,
  Mobility = 2,
  Workload = 3,
  Transfer = 4,
  Gossip = 5,
  Epidemic = 6,
  Certificate = 7,
  Retention = 8,
  Diffusion = 9,
  Deletion = 10,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator; the distribution
/// helpers below are written out so that draws are bit-identical across
/// standard library implementations.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() {
    ++draws_;
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive. Lemire's method.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

  /// Poisson variate. Knuth's product method, split into blocks of mean 16
  /// so that exp(-mean) never underflows.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 0.0) {
      const double block = mean > 16.0 ? 16.0 : mean;
      mean -= block;
      const double limit = std::exp(-block);
      double prod = uniform();
      while (prod > limit) {
        ++total;
        prod *= uniform();
      }
    }
    return total;
  }

  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

/// Derives independent sub-streams keyed by (phase, entity, tick, extra) from
/// a master seed. Draw order inside one phase therefore never depends on the
/// order in which entities are visited.
class KeyedRng {
 public:
  explicit constexpr KeyedRng(std::uint64_t seed = 0) : seed_(seed) {}

  constexpr std::uint64_t seed() const { return seed_; }
  constexpr bool operator==(const KeyedRng&) const = default;

  Stream stream(Phase phase, std::uint64_t entity, std::int64_t tick,
                std::uint64_t extra = 0) const {
    std::uint64_t h = mix64(seed_ ^ 0x6a09e667f3bcc908ULL);
    h = mix64(h ^ (static_cast<std::uint64_t>(phase) * 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (entity + 0x3c6ef372fe94f82bULL));
    h = mix64(h ^ static_cast<std::uint64_t>(tick));
    h = mix64(h ^ (extra * 0xbb67ae8584caa73bULL));
    return Stream(h);
  }

  /// Uniform [0,1) value that is a pure function of the key (no stream).
  double hash_unit(Phase phase, std::uint64_t entity) const {
    return static_cast<double>(stream(phase, entity, 0)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace epirep
