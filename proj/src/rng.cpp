#include "swarmchem/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarmchem {

std::uint64_t RandomSource::below(std::uint64_t n) {
  const auto k = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  return std::min(k, n - 1);
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) {
    word = mix_seed(s);
    s += 0x9E3779B97F4A7C15ULL;
  }
}

Rng Rng::restore(std::uint64_t seed, const std::array<std::uint64_t, 4>& state,
                 std::uint64_t draws) {
  Rng rng(seed);
  rng.state_ = state;
  rng.draws_ = draws;
  return rng;
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  ++draws_;
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // Box-Muller, cosine branch only so the generator carries no cached variate.
  double u1 = uniform01();
  const double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace swarmchem
