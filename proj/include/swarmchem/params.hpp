#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace swarmchem {

/// The eight kinetic parameters of one particle type, in recipe order.
struct KineticParams {
  double radius = 0.0;           ///< perception radius R (pixel)
  double normal_speed = 0.0;     ///< Vn (pixel/step)
  double max_speed = 0.0;        ///< Vm (pixel/step)
  double cohesion = 0.0;         ///< c1 (step^-2)
  double alignment = 0.0;        ///< c2 (step^-1)
  double separation = 0.0;       ///< c3 (pixel^2 step^-2)
  double random_steer = 0.0;     ///< c4, probability per step
  double self_propulsion = 0.0;  ///< c5

  static constexpr std::size_t kCount = 8;

  double& operator[](std::size_t i);
  double operator[](std::size_t i) const;

  friend bool operator==(const KineticParams&, const KineticParams&) = default;
};

struct ParamRange {
  double min;
  double max;
  double span() const { return max - min; }
};

inline constexpr std::array<ParamRange, KineticParams::kCount> kParamRanges{{
    {0.0, 300.0},
    {0.0, 20.0},
    {0.0, 40.0},
    {0.0, 1.0},
    {0.0, 1.0},
    {0.0, 100.0},
    {0.0, 0.5},
    {0.0, 1.0},
}};

inline constexpr std::array<std::string_view, KineticParams::kCount> kParamNames{
    "R", "Vn", "Vm", "c1", "c2", "c3", "c4", "c5"};

/// Largest perception radius any particle can have.
inline constexpr double kMaxPerceptionRadius = 300.0;

/// Clamps every parameter into its admissible range. NaN maps to the lower bound.
KineticParams clamp(const KineticParams& p);

bool in_range(const KineticParams& p);

}  // namespace swarmchem
