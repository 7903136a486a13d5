#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmchem/recipe.hpp"
#include "swarmchem/rng.hpp"
#include "swarmchem/world.hpp"

namespace swarmchem::iec {

/// NIEC: the user picks 1-2 tiles, the rest of the generation is replaced.
/// HIEC: the user applies individual operators; population size floats.
enum class Mode { Niec, Hiec };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using TileId = std::uint64_t;

struct TileConfig {
  double side = 300.0;
  int population = 200;
  /// Tiles per NIEC generation, and the number of random tiles a session starts with.
  std::size_t generation_size = 6;
};

struct SwarmTile {
  TileId id;
  Recipe recipe;
  World world;
  std::uint64_t created_step;
  double created_wall;
};

/// Populates a tile world with recipe.total_count() active particles, entry k
/// contributing count_k particles of type k at uniform positions.
World make_tile_world(const Recipe& recipe, double side, std::uint64_t seed);

inline constexpr double kTileMutationRate = 0.10;
inline constexpr double kTileMutationSigma = 0.10;  ///< fraction of the parameter range
inline constexpr double kCountPerturbation = 0.20;

/// Each parameter perturbed with probability 0.1 by N(0, (0.1 range)^2) and
/// clamped; each count, with probability 0.1, scaled by U(0.8, 1.2), rounded, min 1.
Recipe mutate_tile_recipe(const Recipe& recipe, RandomSource& rng);

/// Concatenation of both entry lists, each count halved and rounded up.
Recipe mix_recipes(const Recipe& a, const Recipe& b);

/// n_types uniform in 1..5 with counts summing to `population`.
Recipe random_tile_recipe(RandomSource& rng, int population);

/// One applied operator. Persisted as one JSON object per line.
struct OperatorRecord {
  double wall_time = 0.0;
  std::uint64_t step = 0;
  std::string op;
  std::vector<TileId> args;
  std::vector<TileId> results;
  /// Session RNG draws consumed after the operator completed.
  std::uint64_t rng_draws = 0;

  friend bool operator==(const OperatorRecord&, const OperatorRecord&) = default;
};

std::string to_log_line(const OperatorRecord& r);
OperatorRecord from_log_line(std::string_view line);
void write_log(std::ostream& out, std::span<const OperatorRecord> records);
std::vector<OperatorRecord> read_log(std::istream& in);

/// A population of independently simulated swarm tiles plus an operator log.
///
/// All operator randomness comes from the session RNG; each tile world owns
/// a generator seeded from it at creation, so stepping tiles never perturbs
/// operator outcomes and a log replays exactly.
class Session {
 public:
  Session(Mode mode, std::uint64_t seed, TileConfig config = {});

  Mode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  const TileConfig& config() const { return config_; }
  const std::vector<SwarmTile>& tiles() const { return tiles_; }
  const std::vector<OperatorRecord>& history() const { return history_; }
  std::uint64_t step() const { return step_; }
  std::uint64_t rng_draws() const { return rng_.draws(); }

  bool contains(TileId id) const;
  /// Throws SessionError for unknown ids.
  const SwarmTile& tile(TileId id) const;

  // HIEC operators; each throws SessionError in NIEC mode or for unknown ids.
  TileId mutate(TileId id);
  TileId mix(TileId a, TileId b);
  TileId replicate(TileId id);
  void kill(TileId id);
  TileId add_random();

  /// NIEC only. One selection keeps it and adds generation_size-1 mutants;
  /// two keep both and add generation_size-2 mutated mixes. Every other tile
  /// is discarded. Offspring always differ from their parents' recipes.
  std::vector<TileId> niec_select(std::span<const TileId> selected);

  /// Steps every tile world.
  void advance(std::uint64_t steps = 1);

  /// Re-applies a log to a fresh session with the same mode, seed and config.
  /// Throws SessionError if a record's results or RNG draw count disagree.
  static Session replay(Mode mode, std::uint64_t seed, const TileConfig& config,
                        std::span<const OperatorRecord> log);

 private:
  SwarmTile& find(TileId id);
  void require(Mode m, std::string_view op) const;
  TileId spawn(Recipe recipe);
  Recipe mutate_until_changed(const Recipe& parent);
  void log(std::string op, std::vector<TileId> args, std::vector<TileId> results);

  Mode mode_;
  std::uint64_t seed_;
  TileConfig config_;
  Rng rng_;
  std::vector<SwarmTile> tiles_;
  std::vector<OperatorRecord> history_;
  TileId next_id_ = 1;
  std::uint64_t step_ = 0;
};

}  // namespace swarmchem::iec
