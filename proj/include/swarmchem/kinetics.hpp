#pragma once

#include <vector>

#include "swarmchem/spatial_grid.hpp"
#include "swarmchem/world.hpp"

namespace swarmchem {

/// Advances worlds by one synchronous kinetic update.
///
/// Per active particle, with neighbors taken among the other active
/// particles strictly inside its perception radius:
///   no neighbors   a = straying kick, components uniform in +-stray_magnitude
///   otherwise      a = c1 (mean pos - pos) + c2 (mean vel - vel)
///                      + c3 sum (pos - pos_j) / |pos - pos_j|^2
///                  plus, with probability c4, a kick uniform in +-random_kick
///   v'  = vel + a, capped at Vm
///   v'' = c5 Vn v'/|v'| + (1 - c5) v', capped at Vm
///   pos = wrap(pos + v'')
/// Passive particles never move. RNG draws happen in particle id order.
///
/// Holds the neighbor grid and scratch buffers so repeated steps do not
/// reallocate.
class KineticStepper {
 public:
  explicit KineticStepper(double side);

  void step(World& world);

 private:
  SpatialGrid grid_;
  std::vector<Vec2> next_vel_;
};

/// One-shot step(); allocates a fresh stepper.
void step(World& world);

/// The separation term c3 (a - b) / |a - b|^2 acting on a particle at `a`.
Vec2 separation_force(Vec2 a, Vec2 b, double c3);

}  // namespace swarmchem
