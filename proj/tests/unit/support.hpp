#pragma once

#include <deque>

#include "swarmchem/rng.hpp"

namespace swarmchem::testing {

/// Plays back queued uniforms and normals, then falls back to fixed values.
class ScriptedRandom final : public RandomSource {
 public:
  explicit ScriptedRandom(double fallback_uniform = 0.999999, double fallback_normal = 0.0)
      : fallback_uniform_(fallback_uniform), fallback_normal_(fallback_normal) {}

  ScriptedRandom& uniforms(std::initializer_list<double> us) {
    uniforms_.insert(uniforms_.end(), us);
    return *this;
  }
  ScriptedRandom& normals(std::initializer_list<double> ns) {
    normals_.insert(normals_.end(), ns);
    return *this;
  }

  double uniform01() override { return pop(uniforms_, fallback_uniform_); }
  double normal() override { return pop(normals_, fallback_normal_); }

  std::size_t uniforms_left() const { return uniforms_.size(); }

 private:
  static double pop(std::deque<double>& q, double fallback) {
    if (q.empty()) return fallback;
    const double v = q.front();
    q.pop_front();
    return v;
  }

  double fallback_uniform_;
  double fallback_normal_;
  std::deque<double> uniforms_;
  std::deque<double> normals_;
};

}  // namespace swarmchem::testing
