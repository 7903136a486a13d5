#include "swarmchem/params.hpp"

#include <algorithm>
#include <cmath>

namespace swarmchem {

namespace {
constexpr std::array<double KineticParams::*, KineticParams::kCount> kMembers{
    &KineticParams::radius,    &KineticParams::normal_speed, &KineticParams::max_speed,
    &KineticParams::cohesion,  &KineticParams::alignment,    &KineticParams::separation,
    &KineticParams::random_steer, &KineticParams::self_propulsion};
}  // namespace

double& KineticParams::operator[](std::size_t i) { return this->*kMembers[i]; }
double KineticParams::operator[](std::size_t i) const { return this->*kMembers[i]; }

KineticParams clamp(const KineticParams& p) {
  KineticParams out = p;
  for (std::size_t i = 0; i < KineticParams::kCount; ++i) {
    const auto& range = kParamRanges[i];
    const double v = out[i];
    out[i] = std::isnan(v) ? range.min : std::clamp(v, range.min, range.max);
  }
  return out;
}

bool in_range(const KineticParams& p) {
  for (std::size_t i = 0; i < KineticParams::kCount; ++i) {
    if (!(p[i] >= kParamRanges[i].min && p[i] <= kParamRanges[i].max)) return false;
  }
  return true;
}

}  // namespace swarmchem
