#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "swarmchem/params.hpp"
#include "swarmchem/recipe.hpp"
#include "swarmchem/rng.hpp"

namespace swarmchem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm_sq() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm_sq()); }
};

using RecipePtr = std::shared_ptr<const Recipe>;

/// A particle is either active (moving, carrying a recipe and a type) or
/// passive (still, no recipe). Use activate()/deactivate() to switch;
/// activate() caps the current velocity at the new type's Vm.
struct Particle {
  Vec2 pos;
  Vec2 vel;
  bool active = false;
  RecipePtr recipe;
  int type_index = 0;
  /// Copy of recipe->entries()[type_index].params while active.
  KineticParams params;

  void activate(RecipePtr r, int index);
  void deactivate();
};

Particle make_passive(Vec2 pos);
Particle make_active(Vec2 pos, Vec2 vel, RecipePtr recipe, int type_index);

/// Magnitudes of the two random steering kicks in the kinetic update.
struct KineticsConfig {
  /// Half-width of each component of the straying acceleration.
  double stray_magnitude = 0.5;
  /// Half-width of each component of the c4 random kick.
  double random_kick = 5.0;
  /// Pairs closer than this receive a fixed-magnitude repulsion in a random direction.
  double min_separation = 0.001;

  friend bool operator==(const KineticsConfig&, const KineticsConfig&) = default;
};

/// Square 2-D space of side `side` with pseudo-periodic boundaries:
/// positions wrap, interactions never do.
struct World {
  double side = 5000.0;
  std::vector<Particle> particles;
  Rng rng;
  std::uint64_t seed = 0;
  std::uint64_t t = 0;
  KineticsConfig kinetics;

  World() = default;
  World(double side_length, std::uint64_t seed_value)
      : side(side_length), rng(seed_value), seed(seed_value) {}

  std::size_t active_count() const;
};

/// Full structural equality including RNG state; recipes compared by value.
bool identical(const World& a, const World& b);

/// Wraps a coordinate into [0, side).
double wrap_coordinate(double x, double side);
Vec2 wrap_position(Vec2 p, double side);

/// Plain Euclidean distance; no minimum-image convention.
double distance_nonwrapping(Vec2 a, Vec2 b);

Vec2 uniform_position(RandomSource& rng, double side);

}  // namespace swarmchem
