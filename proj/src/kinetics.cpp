#include "swarmchem/kinetics.hpp"

#include <numbers>

namespace swarmchem {

namespace {

Vec2 cap_speed(Vec2 v, double max_speed) {
  const double s2 = v.norm_sq();
  if (s2 > max_speed * max_speed) {
    if (max_speed <= 0.0) return {};
    return v * (max_speed / std::sqrt(s2));
  }
  return v;
}

Vec2 random_unit(RandomSource& rng) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

Vec2 separation_force(Vec2 a, Vec2 b, double c3) {
  const Vec2 d = a - b;
  return d * (c3 / d.norm_sq());
}

KineticStepper::KineticStepper(double side) : grid_(side) {}

void KineticStepper::step(World& world) {
  auto& particles = world.particles;
  const auto& cfg = world.kinetics;
  auto& rng = world.rng;

  grid_.rebuild(particles, [&](std::size_t i) { return particles[i].active; });
  next_vel_.assign(particles.size(), Vec2{});

  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Particle& self = particles[i];
    if (!self.active) continue;
    const KineticParams& p = self.params;

    std::size_t count = 0;
    Vec2 sum_pos;
    Vec2 sum_vel;
    Vec2 repulsion;
    const double min_sep2 = cfg.min_separation * cfg.min_separation;
    grid_.for_each_within(self.pos, p.radius, [&](std::size_t j, double d2) {
      if (j == i) return;
      const Particle& other = particles[j];
      ++count;
      sum_pos += other.pos;
      sum_vel += other.vel;
      if (d2 < min_sep2) {
        repulsion += random_unit(rng) * (1.0 / cfg.min_separation);
      } else {
        repulsion += (self.pos - other.pos) * (1.0 / d2);
      }
    });

    Vec2 accel;
    if (count == 0) {
      const double s = cfg.stray_magnitude;
      const double ax = rng.uniform(-s, s);
      const double ay = rng.uniform(-s, s);
      accel = {ax, ay};
    } else {
      const double inv = 1.0 / static_cast<double>(count);
      accel = p.cohesion * (sum_pos * inv - self.pos) + p.alignment * (sum_vel * inv - self.vel) +
              p.separation * repulsion;
      if (rng.bernoulli(p.random_steer)) {
        const double k = cfg.random_kick;
        const double kx = rng.uniform(-k, k);
        const double ky = rng.uniform(-k, k);
        accel += Vec2{kx, ky};
      }
    }

    Vec2 v = cap_speed(self.vel + accel, p.max_speed);
    const double speed = v.norm();
    const double c5 = p.self_propulsion;
    if (speed > 0.0) {
      v = (c5 * p.normal_speed / speed) * v + (1.0 - c5) * v;
    } else {
      v = (c5 * p.normal_speed) * random_unit(rng);
    }
    next_vel_[i] = cap_speed(v, p.max_speed);
  }

  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle& q = particles[i];
    if (!q.active) continue;
    q.vel = next_vel_[i];
    q.pos = wrap_position(q.pos + q.vel, world.side);
  }
  ++world.t;
}

void step(World& world) {
  KineticStepper stepper(world.side);
  stepper.step(world);
}

}  // namespace swarmchem
