#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

namespace swarmchem {

/// Source of uniform and Gaussian variates used by the evolutionary operators.
///
/// Operators take a RandomSource so tests can script the draws; the
/// simulation itself always uses the concrete Rng below.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform double in [0, 1).
  virtual double uniform01() = 0;
  /// Standard normal variate.
  virtual double normal() = 0;

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
};

/// xoshiro256** seeded through splitmix64.
///
/// The generator and the variate transforms are written out here rather than
/// taken from <random>, whose distributions differ between standard libraries.
class Rng final : public RandomSource {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  double uniform01() override;
  double normal() override;

  /// Number of 64-bit words drawn since seeding.
  std::uint64_t draws() const { return draws_; }
  std::uint64_t seed() const { return seed_; }

  const std::array<std::uint64_t, 4>& state() const { return state_; }
  /// Restores a generator captured with state()/draws().
  static Rng restore(std::uint64_t seed, const std::array<std::uint64_t, 4>& state,
                     std::uint64_t draws);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.seed_ == b.seed_ && a.state_ == b.state_ && a.draws_ == b.draws_;
  }

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t draws_ = 0;
};

/// splitmix64 finalizer, used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace swarmchem
