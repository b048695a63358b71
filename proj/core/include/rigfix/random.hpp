#pragma once

#include <cstdint>

namespace rigfix {

/// splitmix64 step; used for seeding and for stateless lattice hashing.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless hash of a 64-bit key through one splitmix64 round.
std::uint64_t mix64(std::uint64_t key);

/// xorshift64* generator (Vigna): state ^= state >> 12; state ^= state << 25;
/// state ^= state >> 27; output = state * 0x2545F4914F6CDD1D. The state is
/// initialised from the seed by one splitmix64 step (increment
/// 0x9E3779B97F4A7C15, finaliser multipliers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB), remapped to 1 if it comes out zero.
///
/// uniform() takes the top 53 bits of one output, scaled by 2^-53.
/// normal() is Box-Muller on two uniforms, u1 mapped to (0, 1] as 1 - u,
/// returning the cosine branch only (one normal per two draws), so every
/// implementation consumes the stream identically.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  double normal();
  /// True with probability p.
  bool bernoulli(double p);

 private:
  std::uint64_t state_;
};

}  // namespace rigfix
