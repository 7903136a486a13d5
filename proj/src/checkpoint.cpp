#include "swarmchem/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace swarmchem {

namespace {

constexpr char kMagic[8] = {'S', 'W', 'C', 'H', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int k = 0; k < bytes; ++k) out_.put(static_cast<char>((v >> (8 * k)) & 0xFF));
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }

 private:
  std::uint64_t le(int bytes) {
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw CheckpointError("checkpoint truncated");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * k);
    }
    return v;
  }
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const World& world) {
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.f64(world.side);
  w.u64(world.t);
  w.u64(world.seed);
  w.u64(world.rng.seed());
  for (auto word : world.rng.state()) w.u64(word);
  w.u64(world.rng.draws());
  w.f64(world.kinetics.stray_magnitude);
  w.f64(world.kinetics.random_kick);
  w.f64(world.kinetics.min_separation);

  std::unordered_map<const Recipe*, std::int32_t> refs;
  std::vector<const Recipe*> table;
  for (const auto& p : world.particles) {
    if (p.recipe && refs.emplace(p.recipe.get(), static_cast<std::int32_t>(table.size())).second) {
      table.push_back(p.recipe.get());
    }
  }
  w.u32(static_cast<std::uint32_t>(table.size()));
  for (const Recipe* r : table) {
    w.u32(static_cast<std::uint32_t>(r->size()));
    for (const auto& e : r->entries()) {
      w.i32(e.count);
      for (std::size_t k = 0; k < KineticParams::kCount; ++k) w.f64(e.params[k]);
    }
  }

  w.u64(world.particles.size());
  for (const auto& p : world.particles) {
    w.f64(p.pos.x);
    w.f64(p.pos.y);
    w.f64(p.vel.x);
    w.f64(p.vel.y);
    w.u8(p.active ? 1 : 0);
    w.i32(p.recipe ? refs.at(p.recipe.get()) : -1);
    w.i32(p.type_index);
  }
  if (!out) throw CheckpointError("checkpoint write failed");
}

World read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw CheckpointError("not a world checkpoint");
  }
  Reader r(in);
  if (const auto version = r.u32(); version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  World world;
  world.side = r.f64();
  world.t = r.u64();
  world.seed = r.u64();
  const auto rng_seed = r.u64();
  std::array<std::uint64_t, 4> state{};
  for (auto& word : state) word = r.u64();
  const auto draws = r.u64();
  world.rng = Rng::restore(rng_seed, state, draws);
  world.kinetics.stray_magnitude = r.f64();
  world.kinetics.random_kick = r.f64();
  world.kinetics.min_separation = r.f64();

  std::vector<RecipePtr> table(r.u32());
  for (auto& slot : table) {
    std::vector<RecipeEntry> entries(r.u32());
    for (auto& e : entries) {
      e.count = r.i32();
      for (std::size_t k = 0; k < KineticParams::kCount; ++k) e.params[k] = r.f64();
    }
    try {
      slot = std::make_shared<const Recipe>(std::move(entries));
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(std::string("bad recipe in checkpoint: ") + e.what());
    }
  }

  world.particles.resize(r.u64());
  for (auto& p : world.particles) {
    p.pos.x = r.f64();
    p.pos.y = r.f64();
    const Vec2 vel{r.f64(), r.f64()};
    const bool active = r.u8() != 0;
    const auto ref = r.i32();
    const auto type = r.i32();
    if (active) {
      if (ref < 0 || static_cast<std::size_t>(ref) >= table.size()) {
        throw CheckpointError("particle refers to a missing recipe");
      }
      try {
        p.activate(table[static_cast<std::size_t>(ref)], type);
      } catch (const std::invalid_argument& e) {
        throw CheckpointError(e.what());
      }
    } else if (ref != -1) {
      throw CheckpointError("passive particle carries a recipe");
    }
    // Restored after activate(), which would rescale it.
    p.vel = vel;
  }
  return world;
}

void save_checkpoint(const std::string& path, const World& world) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path);
  write_checkpoint(out, world);
}

World load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace swarmchem
