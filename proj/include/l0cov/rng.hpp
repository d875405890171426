#pragma once

// Deterministic random source for the generators and the experiment
// harness.  Draws go through our own Box-Muller / rejection code instead
// of std::*_distribution so that a given seed reproduces the same stream
// on any standard library.

#include <cmath>
#include <cstdint>
#include <random>

namespace l0cov {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable seed derivation: every replicate/stream seed is a pure function
/// of (master, a, b, c), independent of scheduling.
inline std::uint64_t combine_seed(std::uint64_t master, std::uint64_t a,
                                  std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ (b + 0xd1b54a32d192ed03ULL));
  h = splitmix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; one spare value cached per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t rem = (~std::uint64_t{0} % n + 1) % n;  // 2^64 mod n
    const std::uint64_t limit = ~std::uint64_t{0} - rem;        // last accepted
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % n;
  }

  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace l0cov
