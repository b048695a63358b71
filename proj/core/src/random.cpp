#include "rigfix/random.hpp"

#include <cmath>

#include "rigfix/camera_model.hpp"

namespace rigfix {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t key) { return splitmix64(key); }

Xorshift64Star::Xorshift64Star(std::uint64_t seed) {
  state_ = splitmix64(seed);
  if (state_ == 0) state_ = 1;
}

std::uint64_t Xorshift64Star::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double Xorshift64Star::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xorshift64Star::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Xorshift64Star::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

bool Xorshift64Star::bernoulli(double p) { return uniform() < p; }

}  // namespace rigfix
