#include "swarmchem/interactive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "swarmchem/kinetics.hpp"

namespace swarmchem::iec {

std::string_view to_string(Mode m) { return m == Mode::Niec ? "NIEC" : "HIEC"; }

Mode mode_from_string(std::string_view s) {
  if (s == "NIEC" || s == "niec") return Mode::Niec;
  if (s == "HIEC" || s == "hiec") return Mode::Hiec;
  throw SessionError("unknown mode '" + std::string(s) + "'");
}

World make_tile_world(const Recipe& recipe, double side, std::uint64_t seed) {
  World world(side, seed);
  auto shared = std::make_shared<const Recipe>(recipe);
  world.particles.reserve(static_cast<std::size_t>(recipe.total_count()));
  for (std::size_t k = 0; k < recipe.size(); ++k) {
    for (int c = 0; c < recipe[k].count; ++c) {
      const Vec2 pos = uniform_position(world.rng, side);
      world.particles.push_back(make_active(pos, {}, shared, static_cast<int>(k)));
    }
  }
  return world;
}

Recipe mutate_tile_recipe(const Recipe& recipe, RandomSource& rng) {
  std::vector<RecipeEntry> entries = recipe.entries();
  for (auto& e : entries) {
    if (rng.bernoulli(kTileMutationRate)) {
      const double factor = rng.uniform(1.0 - kCountPerturbation, 1.0 + kCountPerturbation);
      e.count = std::max(1, static_cast<int>(std::lround(e.count * factor)));
    }
    for (std::size_t k = 0; k < KineticParams::kCount; ++k) {
      if (rng.bernoulli(kTileMutationRate)) {
        e.params[k] += rng.normal() * kTileMutationSigma * kParamRanges[k].span();
      }
    }
  }
  return Recipe(std::move(entries));
}

Recipe mix_recipes(const Recipe& a, const Recipe& b) {
  std::vector<RecipeEntry> entries;
  for (const Recipe* r : {&a, &b}) {
    for (auto e : r->entries()) {
      e.count = std::max(1, (e.count + 1) / 2);
      entries.push_back(e);
    }
  }
  return Recipe(std::move(entries));
}

Recipe random_tile_recipe(RandomSource& rng, int population) {
  if (population < 1) throw SessionError("tile population must be positive");
  const auto n_types =
      static_cast<int>(std::min<std::uint64_t>(1 + rng.below(5), static_cast<std::uint64_t>(population)));
  Recipe base = random_recipe(rng, static_cast<std::size_t>(n_types), 1);
  std::vector<RecipeEntry> entries = base.entries();
  for (int k = 0; k < n_types; ++k) {
    entries[static_cast<std::size_t>(k)].count = population / n_types + (k < population % n_types ? 1 : 0);
  }
  return Recipe(std::move(entries));
}

// --- operator log ---------------------------------------------------------------

std::string to_log_line(const OperatorRecord& r) {
  nlohmann::json j{{"wall_time", r.wall_time}, {"step", r.step},       {"op", r.op},
                   {"args", r.args},           {"results", r.results}, {"rng_draws", r.rng_draws}};
  return j.dump();
}

OperatorRecord from_log_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    OperatorRecord r;
    r.wall_time = j.at("wall_time").get<double>();
    r.step = j.at("step").get<std::uint64_t>();
    r.op = j.at("op").get<std::string>();
    r.args = j.at("args").get<std::vector<TileId>>();
    r.results = j.at("results").get<std::vector<TileId>>();
    r.rng_draws = j.at("rng_draws").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SessionError(std::string("bad operator log line: ") + e.what());
  }
}

void write_log(std::ostream& out, std::span<const OperatorRecord> records) {
  for (const auto& r : records) out << to_log_line(r) << '\n';
}

std::vector<OperatorRecord> read_log(std::istream& in) {
  std::vector<OperatorRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(from_log_line(line));
  }
  return out;
}

// --- session --------------------------------------------------------------------

namespace {

double wall_clock() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

Session::Session(Mode mode, std::uint64_t seed, TileConfig config)
    : mode_(mode), seed_(seed), config_(config), rng_(seed) {
  if (config_.population < 1) throw SessionError("tile population must be positive");
  if (mode_ == Mode::Niec && config_.generation_size < 2) {
    throw SessionError("NIEC generations need at least two tiles");
  }
  for (std::size_t k = 0; k < config_.generation_size; ++k) {
    spawn(random_tile_recipe(rng_, config_.population));
  }
}

bool Session::contains(TileId id) const {
  return std::any_of(tiles_.begin(), tiles_.end(), [&](const SwarmTile& t) { return t.id == id; });
}

const SwarmTile& Session::tile(TileId id) const {
  for (const auto& t : tiles_) {
    if (t.id == id) return t;
  }
  throw SessionError("unknown tile " + std::to_string(id));
}

SwarmTile& Session::find(TileId id) {
  return const_cast<SwarmTile&>(static_cast<const Session&>(*this).tile(id));
}

void Session::require(Mode m, std::string_view op) const {
  if (mode_ != m) {
    throw SessionError(std::string(op) + " is not available in " + std::string(to_string(mode_)) +
                       " mode");
  }
}

TileId Session::spawn(Recipe recipe) {
  const TileId id = next_id_++;
  World world = make_tile_world(recipe, config_.side, rng_.next_u64());
  tiles_.push_back(SwarmTile{id, std::move(recipe), std::move(world), step_, wall_clock()});
  return id;
}

Recipe Session::mutate_until_changed(const Recipe& parent) {
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Recipe child = mutate_tile_recipe(parent, rng_);
    if (!(child == parent)) return child;
  }
  throw SessionError("mutation failed to change the recipe");
}

void Session::log(std::string op, std::vector<TileId> args, std::vector<TileId> results) {
  history_.push_back(
      {wall_clock(), step_, std::move(op), std::move(args), std::move(results), rng_.draws()});
}

TileId Session::mutate(TileId id) {
  require(Mode::Hiec, "mutate");
  Recipe child = mutate_tile_recipe(tile(id).recipe, rng_);
  const TileId out = spawn(std::move(child));
  log("mutate", {id}, {out});
  return out;
}

TileId Session::mix(TileId a, TileId b) {
  require(Mode::Hiec, "mix");
  if (a == b) throw SessionError("cannot mix a tile with itself");
  Recipe child = mix_recipes(tile(a).recipe, tile(b).recipe);
  const TileId out = spawn(std::move(child));
  log("mix", {a, b}, {out});
  return out;
}

TileId Session::replicate(TileId id) {
  require(Mode::Hiec, "replicate");
  Recipe copy = tile(id).recipe;
  const TileId out = spawn(std::move(copy));
  log("replicate", {id}, {out});
  return out;
}

void Session::kill(TileId id) {
  require(Mode::Hiec, "kill");
  const auto it = std::find_if(tiles_.begin(), tiles_.end(), [&](const SwarmTile& t) { return t.id == id; });
  if (it == tiles_.end()) throw SessionError("unknown tile " + std::to_string(id));
  tiles_.erase(it);
  log("kill", {id}, {});
}

TileId Session::add_random() {
  require(Mode::Hiec, "random");
  const TileId out = spawn(random_tile_recipe(rng_, config_.population));
  log("random", {}, {out});
  return out;
}

std::vector<TileId> Session::niec_select(std::span<const TileId> selected) {
  require(Mode::Niec, "niec_select");
  if (selected.empty() || selected.size() > 2) {
    throw SessionError("select one or two tiles");
  }
  if (selected.size() == 2 && selected[0] == selected[1]) {
    throw SessionError("the two selections must differ");
  }
  for (auto id : selected) tile(id);

  std::vector<SwarmTile> kept;
  for (auto id : selected) kept.push_back(std::move(find(id)));
  tiles_ = std::move(kept);

  std::vector<TileId> created;
  const std::size_t offspring = config_.generation_size - selected.size();
  if (selected.size() == 1) {
    const Recipe parent = tiles_[0].recipe;
    for (std::size_t k = 0; k < offspring; ++k) created.push_back(spawn(mutate_until_changed(parent)));
  } else {
    const Recipe mixed = mix_recipes(tiles_[0].recipe, tiles_[1].recipe);
    for (std::size_t k = 0; k < offspring; ++k) created.push_back(spawn(mutate_until_changed(mixed)));
  }
  log("niec_select", {selected.begin(), selected.end()}, created);
  return created;
}

void Session::advance(std::uint64_t steps) {
  for (std::uint64_t s = 0; s < steps; ++s) {
    for (auto& t : tiles_) swarmchem::step(t.world);
    ++step_;
  }
}

Session Session::replay(Mode mode, std::uint64_t seed, const TileConfig& config,
                        std::span<const OperatorRecord> log) {
  Session s(mode, seed, config);
  for (const auto& r : log) {
    std::vector<TileId> results;
    auto arg = [&](std::size_t k) {
      if (k >= r.args.size()) throw SessionError("log record '" + r.op + "' lacks arguments");
      return r.args[k];
    };
    if (r.op == "mutate") {
      results = {s.mutate(arg(0))};
    } else if (r.op == "mix") {
      results = {s.mix(arg(0), arg(1))};
    } else if (r.op == "replicate") {
      results = {s.replicate(arg(0))};
    } else if (r.op == "kill") {
      s.kill(arg(0));
    } else if (r.op == "random") {
      results = {s.add_random()};
    } else if (r.op == "niec_select") {
      results = s.niec_select(r.args);
    } else {
      throw SessionError("unknown operator '" + r.op + "' in log");
    }
    if (results != r.results || s.rng_draws() != r.rng_draws) {
      throw SessionError("replay diverged at operator '" + r.op + "'");
    }
  }
  return s;
}

}  // namespace swarmchem::iec
