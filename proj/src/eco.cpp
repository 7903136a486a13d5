#include "swarmchem/eco.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarmchem::eco {

namespace {

constexpr std::array<std::pair<Competition, std::string_view>, 9> kCompetitionNames{{
    {Competition::Faster, "faster"},
    {Competition::Slower, "slower"},
    {Competition::Behind, "behind"},
    {Competition::Majority, "majority"},
    {Competition::MajorityProbabilistic, "majority_probabilistic"},
    {Competition::MajorityRelative, "majority_relative"},
    {Competition::RecipeLength, "recipe_length"},
    {Competition::RecipeLengthThenMajority, "recipe_length_then_majority"},
    {Competition::RecipeLengthTimesMajority, "recipe_length_times_majority"},
}};

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view to_string(Competition c) {
  for (const auto& [value, name] : kCompetitionNames) {
    if (value == c) return name;
  }
  return "unknown";
}

std::string_view to_string(CollisionMode m) {
  return m == CollisionMode::Original ? "original" : "revised";
}

Competition competition_from_string(std::string_view name) {
  for (const auto& [value, n] : kCompetitionNames) {
    if (n == name) return value;
  }
  throw std::invalid_argument("unknown competition function '" + std::string(name) + "'");
}

CollisionMode collision_mode_from_string(std::string_view name) {
  if (name == "original") return CollisionMode::Original;
  if (name == "revised") return CollisionMode::Revised;
  throw std::invalid_argument("unknown collision mode '" + std::string(name) + "'");
}

const std::vector<Competition>& all_competitions() {
  static const std::vector<Competition> all = [] {
    std::vector<Competition> v;
    for (const auto& entry : kCompetitionNames) v.push_back(entry.first);
    return v;
  }();
  return all;
}

void validate(const EcoConfig& c) {
  const std::array<std::pair<double, const char*>, 5> probabilities{{
      {c.redifferentiation, "redifferentiation"},
      {c.p_transmit, "p_transmit"},
      {c.p_spontaneous, "p_spontaneous"},
      {c.add_rate, "add_rate"},
      {c.perturbation.scatter_fraction, "perturbation.scatter_fraction"},
  }};
  for (const auto& [value, name] : probabilities) {
    if (!is_probability(value)) {
      throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
  }
  if (!(c.collision_radius > 0.0)) throw std::invalid_argument("collision_radius must be > 0");
  if (!(c.passive_radius >= 0.0)) throw std::invalid_argument("passive_radius must be >= 0");
  if (!(c.majority_radius > 0.0)) throw std::invalid_argument("majority_radius must be > 0");
  if (!(c.perturbation.disc_radius_fraction >= 0.0)) {
    throw std::invalid_argument("perturbation.disc_radius_fraction must be >= 0");
  }
}

const std::vector<std::string>& condition_names() {
  static const std::vector<std::string> names{"original-low", "original-high", "revised-low",
                                              "revised-high"};
  return names;
}

EcoConfig condition_preset(std::string_view name) {
  EcoConfig c;
  c.competition = Competition::MajorityRelative;
  c.add_rate = 0.5;
  if (name == "original-low" || name == "original-high") {
    c.collision_mode = CollisionMode::Original;
  } else if (name == "revised-low" || name == "revised-high") {
    c.collision_mode = CollisionMode::Revised;
  } else {
    throw std::invalid_argument("unknown condition '" + std::string(name) + "'");
  }
  const bool high = name.ends_with("-high");
  const double factor = high ? kHighMutationFactor : 1.0;
  c.p_transmit = kLowTransmitMutation * factor;
  c.p_spontaneous = kLowSpontaneousMutation * factor;
  c.perturbation.interval = high ? kDefaultPerturbationInterval : 0;
  return c;
}

// --- collisions ---------------------------------------------------------------

bool same_type(const Particle& a, const Particle& b) {
  if (!a.active || !b.active || a.type_index != b.type_index) return false;
  return a.recipe == b.recipe || *a.recipe == *b.recipe;
}

double collision_threshold(const Particle& a, const Particle& b, const EcoConfig& config) {
  if (config.collision_mode == CollisionMode::Revised) return config.collision_radius;
  const double ra = a.active ? a.params.radius : config.passive_radius;
  const double rb = b.active ? b.params.radius : config.passive_radius;
  return 0.2 * std::max(ra, rb);
}

std::vector<CollisionPair> detect_collisions(const World& world, const SpatialGrid& grid,
                                             const EcoConfig& config) {
  const auto& ps = world.particles;
  const double query_radius =
      config.collision_mode == CollisionMode::Revised
          ? config.collision_radius
          : 0.2 * std::max({kMaxPerceptionRadius, config.passive_radius});

  std::vector<CollisionPair> candidates;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!ps[i].active) continue;
    grid.for_each_within(ps[i].pos, query_radius, [&](std::size_t j, double d2) {
      if (j == i) return;
      // Active-active pairs are collected once, from the lower id.
      if (ps[j].active && j < i) return;
      if (same_type(ps[i], ps[j])) return;
      const double threshold = collision_threshold(ps[i], ps[j], config);
      if (d2 < threshold * threshold) candidates.push_back({std::min(i, j), std::max(i, j)});
    });
  }
  std::sort(candidates.begin(), candidates.end(), [](const CollisionPair& x, const CollisionPair& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });

  std::vector<char> used(ps.size(), 0);
  std::vector<CollisionPair> pairs;
  for (const auto& c : candidates) {
    if (used[c.a] || used[c.b]) continue;
    used[c.a] = used[c.b] = 1;
    pairs.push_back(c);
  }
  return pairs;
}

std::vector<CollisionPair> detect_collisions(const World& world, const EcoConfig& config) {
  SpatialGrid grid(world.side, kCollisionCellSize);
  grid.rebuild_all(world.particles);
  return detect_collisions(world, grid, config);
}

// --- competition --------------------------------------------------------------

CompetitorContext make_context(const World& world, const SpatialGrid& grid, std::size_t i,
                               const EcoConfig& config) {
  const auto& ps = world.particles;
  const Particle& self = ps[i];
  CompetitorContext ctx;
  ctx.pos = self.pos;
  ctx.vel = self.vel;
  ctx.recipe_length = self.recipe ? self.recipe->size() : 0;
  if (!self.active) return ctx;

  grid.for_each_within(self.pos, config.majority_radius, [&](std::size_t j, double) {
    if (j != i && ps[j].active && ps[j].params == self.params) ++ctx.same_type_nearby;
  });
  int same = 0;
  int all = 0;
  grid.for_each_within(self.pos, self.params.radius, [&](std::size_t j, double) {
    if (j == i) return;
    ++all;
    if (ps[j].active && ps[j].params == self.params) ++same;
  });
  ctx.same_type_density = all > 0 ? static_cast<double>(same) / all : 0.0;
  return ctx;
}

bool is_behind(const CompetitorContext& a, const CompetitorContext& b) {
  const Vec2 back{-b.vel.x, -b.vel.y};
  const Vec2 offset = a.pos - b.pos;
  const double nb = back.norm();
  const double no = offset.norm();
  if (nb == 0.0 || no == 0.0) return false;
  const double cos_angle = (back.x * offset.x + back.y * offset.y) / (nb * no);
  return cos_angle >= std::cos(std::numbers::pi / 4.0);
}

namespace {

Winner by_score(double a, double b, RandomSource& rng) {
  if (a > b) return Winner::First;
  if (b > a) return Winner::Second;
  return rng.bernoulli(0.5) ? Winner::First : Winner::Second;
}

}  // namespace

Winner compete(const CompetitorContext& a, const CompetitorContext& b, Competition fn,
               RandomSource& rng) {
  switch (fn) {
    case Competition::Faster:
      return by_score(a.vel.norm(), b.vel.norm(), rng);
    case Competition::Slower:
      return by_score(-a.vel.norm(), -b.vel.norm(), rng);
    case Competition::Behind: {
      const bool a_behind = is_behind(a, b);
      const bool b_behind = is_behind(b, a);
      return by_score(a_behind ? 1.0 : 0.0, b_behind ? 1.0 : 0.0, rng);
    }
    case Competition::Majority:
      return by_score(a.same_type_nearby, b.same_type_nearby, rng);
    case Competition::MajorityProbabilistic: {
      const double total = static_cast<double>(a.same_type_nearby) + b.same_type_nearby;
      if (total <= 0.0) return rng.bernoulli(0.5) ? Winner::First : Winner::Second;
      return rng.bernoulli(a.same_type_nearby / total) ? Winner::First : Winner::Second;
    }
    case Competition::MajorityRelative:
      return by_score(a.same_type_density, b.same_type_density, rng);
    case Competition::RecipeLength:
      return by_score(static_cast<double>(a.recipe_length), static_cast<double>(b.recipe_length),
                      rng);
    case Competition::RecipeLengthThenMajority:
      if (a.recipe_length != b.recipe_length) {
        return a.recipe_length > b.recipe_length ? Winner::First : Winner::Second;
      }
      return by_score(a.same_type_nearby, b.same_type_nearby, rng);
    case Competition::RecipeLengthTimesMajority:
      return by_score(static_cast<double>(a.recipe_length) * a.same_type_nearby,
                      static_cast<double>(b.recipe_length) * b.same_type_nearby, rng);
  }
  throw std::logic_error("unhandled competition function");
}

// --- recipes ------------------------------------------------------------------

int differentiate(const Recipe& recipe, RandomSource& rng) {
  const long total = recipe.total_count();
  const auto pick = static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
  long acc = 0;
  for (std::size_t k = 0; k < recipe.size(); ++k) {
    acc += recipe[k].count;
    if (pick < acc) return static_cast<int>(k);
  }
  return static_cast<int>(recipe.size() - 1);
}

double point_mutate(std::size_t param, double value, RandomSource& rng) {
  const auto& range = kParamRanges[param];
  const double v = value + rng.normal() * kPointMutationSigma * range.span();
  return std::clamp(v, range.min, range.max);
}

Recipe mutate_recipe(const Recipe& recipe, RandomSource& rng, double add_rate,
                     MutationEvent* event) {
  MutationEvent ev;
  const auto& src = recipe.entries();

  std::vector<int> copies(src.size(), 1);
  std::size_t first_deleted = src.size();
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (rng.bernoulli(kDuplicationRate)) {
      ++copies[k];
      ++ev.duplications;
    }
    if (rng.bernoulli(kDeletionRate)) {
      --copies[k];
      ++ev.deletions;
      if (first_deleted == src.size()) first_deleted = k;
    }
  }

  std::vector<RecipeEntry> out;
  for (std::size_t k = 0; k < src.size(); ++k) {
    for (int c = 0; c < copies[k]; ++c) out.push_back(src[k]);
  }
  if (out.empty()) {
    out.push_back(src[first_deleted]);
    --ev.deletions;
    ev.deletion_suppressed = true;
  }

  if (rng.bernoulli(add_rate)) {
    int max_count = 1;
    for (const auto& e : out) max_count = std::max(max_count, e.count);
    RecipeEntry added;
    added.count = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_count)));
    added.params = random_params(rng);
    out.push_back(added);
    ++ev.additions;
  }

  for (auto& e : out) {
    for (std::size_t k = 0; k < KineticParams::kCount; ++k) {
      if (rng.bernoulli(kPointMutationRate)) {
        e.params[k] = point_mutate(k, e.params[k], rng);
        ++ev.point_mutations;
      }
    }
  }

  if (event) *event = ev;
  return Recipe(std::move(out));
}

// --- resolution ---------------------------------------------------------------

namespace {

bool transmit(World& world, std::size_t source, std::size_t target, const EcoConfig& config,
              RandomSource& rng) {
  auto& ps = world.particles;
  RecipePtr recipe = ps[source].recipe;
  bool mutated = false;
  if (rng.bernoulli(config.p_transmit)) {
    recipe = std::make_shared<const Recipe>(mutate_recipe(*recipe, rng, config.add_rate));
    mutated = true;
  }
  const int type = differentiate(*recipe, rng);
  ps[target].activate(std::move(recipe), type);
  return mutated;
}

}  // namespace

CollisionOutcome resolve_collision(World& world, const SpatialGrid& grid, CollisionPair pair,
                                   const EcoConfig& config, RandomSource& rng) {
  auto& ps = world.particles;
  const Particle& a = ps[pair.a];
  const Particle& b = ps[pair.b];
  CollisionOutcome out;
  if (!a.active && !b.active) return out;

  if (a.active != b.active) {
    out.kind = CollisionOutcome::Kind::Recruited;
    out.source = a.active ? pair.a : pair.b;
    out.target = a.active ? pair.b : pair.a;
    out.mutated = transmit(world, out.source, out.target, config, rng);
    return out;
  }

  if (same_type(a, b)) return out;

  const auto ctx_a = make_context(world, grid, pair.a, config);
  const auto ctx_b = make_context(world, grid, pair.b, config);
  const Winner w = compete(ctx_a, ctx_b, config.competition, rng);
  out.kind = CollisionOutcome::Kind::Transmitted;
  out.source = w == Winner::First ? pair.a : pair.b;
  out.target = w == Winner::First ? pair.b : pair.a;
  out.mutated = transmit(world, out.source, out.target, config, rng);
  return out;
}

SpontaneousStats spontaneous_updates(World& world, const EcoConfig& config, RandomSource& rng) {
  SpontaneousStats stats;
  for (auto& p : world.particles) {
    if (!p.active) continue;
    if (rng.bernoulli(config.redifferentiation)) {
      p.activate(p.recipe, differentiate(*p.recipe, rng));
      ++stats.redifferentiations;
    }
    if (rng.bernoulli(config.p_spontaneous)) {
      auto mutated = std::make_shared<const Recipe>(mutate_recipe(*p.recipe, rng, config.add_rate));
      const int type = differentiate(*mutated, rng);
      p.activate(std::move(mutated), type);
      ++stats.mutations;
    }
  }
  return stats;
}

// --- initial conditions and perturbations ---------------------------------------

std::string_view to_string(InitialKind k) { return k == InitialKind::Random ? "random" : "designed"; }

InitialKind initial_kind_from_string(std::string_view name) {
  if (name == "random") return InitialKind::Random;
  if (name == "designed") return InitialKind::Designed;
  throw std::invalid_argument("unknown initial condition '" + std::string(name) + "'");
}

World make_initial_world(InitialKind kind, const std::optional<Recipe>& recipe, std::uint64_t seed,
                         const InitialScale& scale) {
  if (kind == InitialKind::Designed && !recipe) {
    throw std::invalid_argument("designed initial condition needs a recipe");
  }
  const std::size_t actives = kind == InitialKind::Random ? scale.random_active : 1;
  if (actives > scale.particles) throw std::invalid_argument("more actives than particles");
  if (!(scale.side > 0.0)) throw std::invalid_argument("side must be positive");

  World world(scale.side, seed);
  auto& rng = world.rng;
  world.particles.reserve(scale.particles);
  if (kind == InitialKind::Random) {
    for (std::size_t k = 0; k < actives; ++k) {
      const Vec2 pos = uniform_position(rng, scale.side);
      auto r = std::make_shared<const Recipe>(random_recipe(rng, 1, 1));
      world.particles.push_back(make_active(pos, {}, std::move(r), 0));
    }
  } else {
    auto r = std::make_shared<const Recipe>(*recipe);
    const int type = differentiate(*r, rng);
    world.particles.push_back(
        make_active({scale.side / 2.0, scale.side / 2.0}, {}, std::move(r), type));
  }
  while (world.particles.size() < scale.particles) {
    world.particles.push_back(make_passive(uniform_position(rng, scale.side)));
  }
  return world;
}

PerturbationEvent draw_perturbation(const PerturbationSchedule& schedule, double side,
                                    RandomSource& rng) {
  PerturbationEvent ev;
  ev.kind = rng.bernoulli(0.5) ? PerturbationKind::DeactivateDisc : PerturbationKind::Scatter;
  ev.center = uniform_position(rng, side);
  ev.radius = schedule.disc_radius_fraction * side;
  ev.fraction = schedule.scatter_fraction;
  return ev;
}

std::size_t apply_perturbation(World& world, const PerturbationEvent& event, RandomSource& rng) {
  std::size_t affected = 0;
  switch (event.kind) {
    case PerturbationKind::DeactivateDisc: {
      const double r2 = event.radius * event.radius;
      for (auto& p : world.particles) {
        if ((p.pos - event.center).norm_sq() <= r2) {
          if (p.active) ++affected;
          p.deactivate();
        }
      }
      break;
    }
    case PerturbationKind::Scatter:
      for (auto& p : world.particles) {
        if (rng.bernoulli(event.fraction)) {
          p.pos = uniform_position(rng, world.side);
          ++affected;
        }
      }
      break;
  }
  return affected;
}

// --- driver ---------------------------------------------------------------------

EcoSimulation::EcoSimulation(World world, EcoConfig config)
    : world_(std::move(world)),
      config_(config),
      stepper_(world_.side),
      grid_(world_.side, kCollisionCellSize) {
  validate(config_);
}

StepStats EcoSimulation::advance() {
  StepStats stats;
  stepper_.step(world_);

  grid_.rebuild_all(world_.particles);
  const auto pairs = detect_collisions(world_, grid_, config_);
  stats.collisions = pairs.size();
  for (const auto& pair : pairs) {
    const auto out = resolve_collision(world_, grid_, pair, config_, world_.rng);
    if (out.kind == CollisionOutcome::Kind::Recruited) ++stats.recruitments;
    if (out.kind == CollisionOutcome::Kind::Transmitted) ++stats.transmissions;
    if (out.mutated) ++stats.transmission_mutations;
  }

  stats.spontaneous = spontaneous_updates(world_, config_, world_.rng);

  const auto interval = config_.perturbation.interval;
  if (interval > 0 && world_.t % interval == 0) {
    const auto ev = draw_perturbation(config_.perturbation, world_.side, world_.rng);
    apply_perturbation(world_, ev, world_.rng);
    stats.perturbed = true;
  }
  return stats;
}

void EcoSimulation::run(std::uint64_t steps) {
  for (std::uint64_t s = 0; s < steps; ++s) advance();
}

}  // namespace swarmchem::eco
