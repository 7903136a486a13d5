#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchem/kinetics.hpp"
#include "swarmchem/recipe.hpp"
#include "swarmchem/spatial_grid.hpp"
#include "swarmchem/world.hpp"

namespace swarmchem::eco {

enum class Competition {
  Faster,
  Slower,
  Behind,
  Majority,
  MajorityProbabilistic,
  MajorityRelative,
  RecipeLength,
  RecipeLengthThenMajority,
  RecipeLengthTimesMajority,
};

enum class CollisionMode { Original, Revised };

std::string_view to_string(Competition c);
std::string_view to_string(CollisionMode m);
/// Throws std::invalid_argument for unknown names.
Competition competition_from_string(std::string_view name);
CollisionMode collision_mode_from_string(std::string_view name);
const std::vector<Competition>& all_competitions();

struct PerturbationSchedule {
  /// Steps between events; 0 disables perturbations.
  std::uint64_t interval = 0;
  /// Disc radius as a fraction of the side length.
  double disc_radius_fraction = 0.1;
  /// Fraction of particles relocated by a scatter event.
  double scatter_fraction = 0.1;

  friend bool operator==(const PerturbationSchedule&, const PerturbationSchedule&) = default;
};

struct EcoConfig {
  double redifferentiation = 0.005;  ///< r
  double p_transmit = 1e-3;          ///< p_t
  double p_spontaneous = 1e-5;       ///< p_s
  Competition competition = Competition::MajorityRelative;
  CollisionMode collision_mode = CollisionMode::Revised;
  double collision_radius = 10.0;
  /// Stand-in perception radius of a passive particle in original collision mode.
  double passive_radius = 10.0;
  /// Neighborhood radius for same-type counts in the majority selectors.
  double majority_radius = 30.0;
  double add_rate = 0.10;
  PerturbationSchedule perturbation;

  friend bool operator==(const EcoConfig&, const EcoConfig&) = default;
};

/// Throws std::invalid_argument when a probability leaves [0, 1] or a radius is not positive.
void validate(const EcoConfig& config);

inline constexpr double kLowTransmitMutation = 1e-3;
inline constexpr double kLowSpontaneousMutation = 1e-5;
inline constexpr double kHighMutationFactor = 100.0;
inline constexpr std::uint64_t kDefaultPerturbationInterval = 2000;

/// Cell size of the grid behind collision and competitor-context queries.
/// Their radii are short, and results do not depend on the cell size.
inline constexpr double kCollisionCellSize = 30.0;

/// The four named conditions: original-low, original-high, revised-low, revised-high.
/// Throws std::invalid_argument for other names.
EcoConfig condition_preset(std::string_view name);
const std::vector<std::string>& condition_names();

// --- collisions ---------------------------------------------------------------

struct CollisionPair {
  std::size_t a;  ///< lower id
  std::size_t b;  ///< higher id
  friend bool operator==(const CollisionPair&, const CollisionPair&) = default;
};

/// Particles carry the same type: identical recipe and type index.
bool same_type(const Particle& a, const Particle& b);

/// Contact threshold for a pair under the configured collision mode.
double collision_threshold(const Particle& a, const Particle& b, const EcoConfig& config);

/// Pairs in contact whose resolution can change something (at least one
/// active particle, and not two particles of the same type). Every particle
/// appears in at most one pair; candidates are taken greedily in ascending
/// (a, b) order. `grid` must index every particle at current positions.
std::vector<CollisionPair> detect_collisions(const World& world, const SpatialGrid& grid,
                                             const EcoConfig& config);
std::vector<CollisionPair> detect_collisions(const World& world, const EcoConfig& config);

// --- competition --------------------------------------------------------------

struct CompetitorContext {
  Vec2 pos;
  Vec2 vel;
  std::size_t recipe_length = 0;
  /// Other active particles with identical kinetic parameters within majority_radius.
  int same_type_nearby = 0;
  /// same-type / all particles inside the particle's own perception radius, self excluded.
  double same_type_density = 0.0;
};

CompetitorContext make_context(const World& world, const SpatialGrid& grid, std::size_t i,
                               const EcoConfig& config);

enum class Winner { First, Second };

/// Exact ties in deterministic selectors go to a fair coin.
Winner compete(const CompetitorContext& a, const CompetitorContext& b, Competition fn,
               RandomSource& rng);

/// `a` sits inside the 90-degree cone pointing backwards from b's velocity.
bool is_behind(const CompetitorContext& a, const CompetitorContext& b);

// --- recipes ------------------------------------------------------------------

/// Type index k drawn with probability count_k / total count.
int differentiate(const Recipe& recipe, RandomSource& rng);

struct MutationEvent {
  int duplications = 0;
  int deletions = 0;
  int additions = 0;
  int point_mutations = 0;
  bool deletion_suppressed = false;
};

inline constexpr double kDuplicationRate = 0.05;
inline constexpr double kDeletionRate = 0.05;
inline constexpr double kPointMutationRate = 0.10;
inline constexpr double kPointMutationSigma = 0.10;  ///< fraction of the parameter range

/// One mutation event. Per original entry: duplicate with 5%, delete with 5%;
/// then append a random entry with probability add_rate; then Gaussian point
/// mutation of each parameter with 10%. Never returns an empty recipe.
Recipe mutate_recipe(const Recipe& recipe, RandomSource& rng, double add_rate,
                     MutationEvent* event = nullptr);

/// Gaussian perturbation of one parameter, clamped into range.
double point_mutate(std::size_t param, double value, RandomSource& rng);

// --- resolution ---------------------------------------------------------------

struct CollisionOutcome {
  enum class Kind { None, Recruited, Transmitted } kind = Kind::None;
  std::size_t source = 0;
  std::size_t target = 0;
  bool mutated = false;
};

/// Applies the transmission rules to one detected pair.
CollisionOutcome resolve_collision(World& world, const SpatialGrid& grid, CollisionPair pair,
                                   const EcoConfig& config, RandomSource& rng);

struct SpontaneousStats {
  std::size_t redifferentiations = 0;
  std::size_t mutations = 0;
};

/// Per active particle: re-differentiate with probability r, then mutate the
/// carried recipe with probability p_s (the particle re-differentiates under
/// the mutated recipe).
SpontaneousStats spontaneous_updates(World& world, const EcoConfig& config, RandomSource& rng);

// --- initial conditions and perturbations ---------------------------------------

enum class InitialKind { Random, Designed };

std::string_view to_string(InitialKind k);
InitialKind initial_kind_from_string(std::string_view name);

struct InitialScale {
  std::size_t particles = 10'000;
  std::size_t random_active = 100;
  double side = 5000.0;
};

/// Random: `random_active` actives with their own one-type random recipes plus
/// passives, all uniform. Designed: one active holding `recipe` at the centre
/// plus passives. Actives take the lowest ids.
World make_initial_world(InitialKind kind, const std::optional<Recipe>& recipe, std::uint64_t seed,
                         const InitialScale& scale = {});

enum class PerturbationKind { DeactivateDisc, Scatter };

struct PerturbationEvent {
  PerturbationKind kind = PerturbationKind::DeactivateDisc;
  Vec2 center;
  double radius = 0.0;
  double fraction = 0.0;
};

PerturbationEvent draw_perturbation(const PerturbationSchedule& schedule, double side,
                                    RandomSource& rng);

/// Returns the number of particles affected. Particle count is unchanged.
std::size_t apply_perturbation(World& world, const PerturbationEvent& event, RandomSource& rng);

// --- driver ---------------------------------------------------------------------

struct StepStats {
  std::size_t collisions = 0;
  std::size_t recruitments = 0;
  std::size_t transmissions = 0;
  std::size_t transmission_mutations = 0;
  SpontaneousStats spontaneous;
  bool perturbed = false;
};

/// One eco step = kinetic step, collisions on the new positions, spontaneous
/// updates, then a scheduled perturbation. All draws come from world.rng.
class EcoSimulation {
 public:
  EcoSimulation(World world, EcoConfig config);

  StepStats advance();
  void run(std::uint64_t steps);

  const World& world() const { return world_; }
  World& world() { return world_; }
  const EcoConfig& config() const { return config_; }

 private:
  World world_;
  EcoConfig config_;
  KineticStepper stepper_;
  SpatialGrid grid_;
};

}  // namespace swarmchem::eco
