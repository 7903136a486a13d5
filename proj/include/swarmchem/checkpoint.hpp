#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "swarmchem/world.hpp"

namespace swarmchem {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary world checkpoint, little-endian, version 1:
///
///   magic "SWCHKPT1", u32 version
///   f64 side, u64 t, u64 seed, u64 rng_seed, u64[4] rng_state, u64 rng_draws
///   f64 stray_magnitude, f64 random_kick, f64 min_separation
///   u32 recipe_count, then per recipe: u32 entries, per entry i32 count + f64[8]
///   u64 particle_count, then per particle:
///     f64 px, py, vx, vy, u8 active, i32 recipe_ref (-1 when passive), i32 type_index
///
/// Particles sharing a recipe object share one table row, so sharing survives
/// a round trip.
void write_checkpoint(std::ostream& out, const World& world);
World read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const World& world);
World load_checkpoint(const std::string& path);

}  // namespace swarmchem
