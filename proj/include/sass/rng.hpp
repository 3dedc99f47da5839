#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sass {

// Seeded random source used for every stochastic choice in the library.
//
// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
// standard. Seeds for the engine and for child streams are mixed through
// SplitMix64 (Steele, Lea & Flood 2014), so `split(k)` yields a stream that
// depends only on the parent seed and `k`, never on how many draws the parent
// has made. Conversions are spelled out here rather than delegated to
// <random> distributions, whose algorithms are implementation-defined:
//   uniform()  = (next_u64() >> 11) * 2^-53            in [0, 1)
//   normal()   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)     Box-Muller, no caching
//   below(n)   = rejection sampling on next_u64()
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t below(std::uint64_t n);

  Rng split(std::uint64_t stream) const;

  // Text form of the engine state (standard stream format of mt19937_64)
  // prefixed with the seed. restore() accepts exactly what state() produced.
  std::string state() const;
  static Rng restore(const std::string& text);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sass
