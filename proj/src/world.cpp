#include "swarmchem/world.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarmchem {

void Particle::activate(RecipePtr r, int index) {
  if (!r || index < 0 || static_cast<std::size_t>(index) >= r->size()) {
    throw std::invalid_argument("activate: type index outside recipe");
  }
  recipe = std::move(r);
  type_index = index;
  params = (*recipe)[static_cast<std::size_t>(index)].params;
  active = true;
  const double speed = vel.norm();
  if (speed > params.max_speed) vel = speed > 0.0 ? vel * (params.max_speed / speed) : Vec2{};
}

void Particle::deactivate() {
  active = false;
  recipe.reset();
  type_index = 0;
  params = {};
  vel = {};
}

Particle make_passive(Vec2 pos) {
  Particle p;
  p.pos = pos;
  return p;
}

Particle make_active(Vec2 pos, Vec2 vel, RecipePtr recipe, int type_index) {
  Particle p;
  p.pos = pos;
  p.vel = vel;
  p.activate(std::move(recipe), type_index);
  return p;
}

std::size_t World::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(particles.begin(), particles.end(), [](const Particle& p) { return p.active; }));
}

bool identical(const World& a, const World& b) {
  if (a.side != b.side || a.seed != b.seed || a.t != b.t || !(a.rng == b.rng) ||
      !(a.kinetics == b.kinetics) || a.particles.size() != b.particles.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    const auto& p = a.particles[i];
    const auto& q = b.particles[i];
    if (!(p.pos == q.pos) || !(p.vel == q.vel) || p.active != q.active ||
        p.type_index != q.type_index || !(p.params == q.params)) {
      return false;
    }
    if (static_cast<bool>(p.recipe) != static_cast<bool>(q.recipe)) return false;
    if (p.recipe && p.recipe != q.recipe && !(*p.recipe == *q.recipe)) return false;
  }
  return true;
}

double wrap_coordinate(double x, double side) {
  double w = x - side * std::floor(x / side);
  // x slightly below zero can round up to exactly `side`.
  if (w >= side || w < 0.0) w = 0.0;
  return w;
}

Vec2 wrap_position(Vec2 p, double side) {
  return {wrap_coordinate(p.x, side), wrap_coordinate(p.y, side)};
}

double distance_nonwrapping(Vec2 a, Vec2 b) { return (a - b).norm(); }

Vec2 uniform_position(RandomSource& rng, double side) {
  const double x = rng.uniform(0.0, side);
  const double y = rng.uniform(0.0, side);
  return {x, y};
}

}  // namespace swarmchem
