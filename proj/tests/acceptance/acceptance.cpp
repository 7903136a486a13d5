// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swarmchem/eco.hpp"
#include "swarmchem/kinetics.hpp"
#include "swarmchem/lab.hpp"
#include "swarmchem/metrics.hpp"
#include "swarmchem/ppm.hpp"
#include "swarmchem/spatial_grid.hpp"

using namespace swarmchem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- kinetics oracle --------------------------------------------------------------------

Outcome kinetics_oracle() {
  const auto t0 = Clock::now();
  Rng gen(2024);
  std::size_t queries = 0;
  for (int w = 0; w < 1000; ++w) {
    const double side = gen.uniform(300.0, 3000.0);
    World world(side, gen.next_u64());
    const auto n = 1 + gen.below(500);
    const auto recipe = std::make_shared<const Recipe>(random_recipe(gen, 4, 1));
    for (std::uint64_t i = 0; i < n; ++i) {
      const Vec2 pos = uniform_position(gen, side);
      if (gen.bernoulli(0.2)) {
        world.particles.push_back(make_passive(pos));
      } else {
        world.particles.push_back(make_active(pos, {}, recipe, static_cast<int>(gen.below(4))));
      }
    }
    SpatialGrid grid(side);
    grid.rebuild_all(world.particles);
    for (std::size_t i = 0; i < world.particles.size(); ++i) {
      const double r = world.particles[i].active ? world.particles[i].params.radius
                                                 : gen.uniform(0.0, 300.0);
      ++queries;
      if (neighbors(world, grid, i, r) != neighbors_brute_force(world, i, r)) {
        return {false, "mismatch in world " + std::to_string(w) + " particle " + std::to_string(i)};
      }
    }
  }
  const double secs = seconds_since(t0);
  return {secs < 60.0, "1000 worlds, " + std::to_string(queries) + " queries identical, " +
                           fmt("%.1f s", secs)};
}

// --- determinism ----------------------------------------------------------------------------

std::vector<std::string> encoded_snapshots(const lab::RunConfig& cfg, std::uint64_t seed) {
  std::vector<std::string> out;
  lab::simulate(cfg, seed, 5000, 500, [&](const World&, const metrics::Bitmap& b) {
    if (b.step() < 500) return;
    std::ostringstream s;
    metrics::write_ppm(s, b);
    out.push_back(s.str());
  });
  return out;
}

Outcome determinism() {
  const auto t0 = Clock::now();
  lab::RunConfig cfg = lab::preset_run_config("revised-high", "random");
  cfg.scale = {1000, 10, 1500};
  const auto a = encoded_snapshots(cfg, 77);
  const auto b = encoded_snapshots(cfg, 77);
  const double secs = seconds_since(t0);
  const bool same = a.size() == 10 && a == b;
  return {same && secs < 120.0, std::to_string(a.size()) + " snapshots (steps 500-5000) " +
                                    (same ? "byte-identical" : "DIFFER") + ", " +
                                    fmt("%.1f s for both runs", secs)};
}

// --- invariants ------------------------------------------------------------------------------

Outcome invariant_suite() {
  Rng fuzz(99);
  eco::EcoConfig cfg;
  cfg.competition = eco::all_competitions()[fuzz.below(eco::all_competitions().size())];
  cfg.collision_mode = eco::CollisionMode::Original;
  cfg.p_transmit = 0.2;
  cfg.p_spontaneous = 0.01;
  cfg.redifferentiation = 0.02;
  cfg.add_rate = 0.5;
  cfg.perturbation.interval = 500;
  eco::EcoSimulation sim(eco::make_initial_world(eco::InitialKind::Random, std::nullopt, 4242, {600, 60, 900}),
                         cfg);
  const std::size_t n = sim.world().particles.size();
  std::size_t checks = 0;
  for (int t = 1; t <= 10'000; ++t) {
    if (t == 5000) sim = eco::EcoSimulation(sim.world(), [&] {
      auto c = cfg;
      c.collision_mode = eco::CollisionMode::Revised;
      c.competition = eco::Competition::Faster;
      return c;
    }());
    sim.advance();
    const World& w = sim.world();
    if (w.particles.size() != n) return {false, "particle count changed at step " + std::to_string(t)};
    for (const auto& p : w.particles) {
      ++checks;
      if (!(p.pos.x >= 0.0 && p.pos.x < w.side && p.pos.y >= 0.0 && p.pos.y < w.side)) {
        return {false, "position outside [0, L) at step " + std::to_string(t)};
      }
      if (!p.active) continue;
      if (p.vel.norm() > p.params.max_speed + 1e-9) {
        return {false, "speed cap violated at step " + std::to_string(t)};
      }
      if (!p.recipe || p.recipe->size() == 0) return {false, "empty recipe at step " + std::to_string(t)};
      const KineticParams once = clamp(p.params);
      if (!(once == p.params) || !(clamp(once) == once)) {
        return {false, "parameters not a clamp fixed point at step " + std::to_string(t)};
      }
    }
  }
  return {true, "10000 steps, " + std::to_string(checks) + " particle checks (speed, wrap, count, recipe, clamp)"};
}

// --- codec -------------------------------------------------------------------------------------

Outcome codec() {
  Rng rng(31337);
  for (int i = 0; i < 10'000; ++i) {
    const Recipe r = random_recipe(rng, 1 + rng.below(8), 1 + static_cast<int>(rng.below(500)));
    if (!(parse_recipe(serialize_recipe(r)) == r)) return {false, "round trip failed on recipe " + std::to_string(i)};
  }
  const std::string fig = lab::kDefaultDesignedRecipe;
  const bool verbatim = serialize_recipe(parse_recipe(fig)) == fig;
  return {verbatim, std::string("10000 random recipes exact; four-row example ") +
                        (verbatim ? "verbatim" : "NOT verbatim")};
}

// --- differentiation -----------------------------------------------------------------------------

Outcome differentiation() {
  const Recipe fig = parse_recipe(lab::kDefaultDesignedRecipe);
  const std::array<double, 4> published{0.437, 0.171, 0.252, 0.140};
  Rng rng(5);
  std::array<int, 4> hits{};
  const int n = 100'000;
  for (int i = 0; i < n; ++i) ++hits[eco::differentiate(fig, rng)];
  bool ok = true;
  double chi2 = 0.0;
  std::string freqs;
  for (int k = 0; k < 4; ++k) {
    const double f = hits[k] / double(n);
    ok &= std::abs(f - published[k]) <= 0.01;
    const double e = n * fig[k].count / double(fig.total_count());
    chi2 += (hits[k] - e) * (hits[k] - e) / e;
    freqs += fmt("%.4f ", f);
  }
  ok &= chi2 < 16.27;  // chi-square, 3 dof, p = 0.001
  return {ok, "frequencies " + freqs + fmt("chi2 %.2f", chi2)};
}

// --- competition -----------------------------------------------------------------------------------

class FixedCoin final : public RandomSource {
 public:
  explicit FixedCoin(double u) : u_(u) {}
  double uniform01() override { return u_; }
  double normal() override { return 0.0; }

 private:
  double u_;
};

eco::CompetitorContext ctx(double speed, int nearby, double density, std::size_t length) {
  eco::CompetitorContext c;
  c.vel = {speed, 0.0};
  c.same_type_nearby = nearby;
  c.same_type_density = density;
  c.recipe_length = length;
  return c;
}

Outcome competition() {
  using eco::Competition;
  using eco::Winner;
  FixedCoin no_coin(0.9999);
  int stated = 0;
  bool ok = true;
  const auto expect = [&](Competition fn, const eco::CompetitorContext& win, const eco::CompetitorContext& lose) {
    ++stated;
    ok &= eco::compete(win, lose, fn, no_coin) == Winner::First;
    ok &= eco::compete(lose, win, fn, no_coin) == Winner::Second;
  };
  expect(Competition::Faster, ctx(5, 0, 0, 1), ctx(3, 0, 0, 1));
  expect(Competition::Slower, ctx(3, 0, 0, 1), ctx(5, 0, 0, 1));
  auto chaser = ctx(2, 0, 0, 1);
  chaser.pos = {-10, 3};
  expect(Competition::Behind, chaser, ctx(2, 0, 0, 1));
  expect(Competition::Majority, ctx(1, 7, 0, 1), ctx(1, 3, 0, 1));
  expect(Competition::MajorityRelative, ctx(1, 0, 0.8, 1), ctx(1, 0, 0.3, 1));
  expect(Competition::RecipeLength, ctx(1, 0, 0, 4), ctx(1, 0, 0, 2));
  expect(Competition::RecipeLengthThenMajority, ctx(1, 1, 0, 4), ctx(1, 9, 0, 2));
  expect(Competition::RecipeLengthThenMajority, ctx(1, 7, 0, 3), ctx(1, 3, 0, 3));
  expect(Competition::RecipeLengthTimesMajority, ctx(1, 5, 0, 2), ctx(1, 2, 0, 4));
  Rng prob(8);
  int first = 0;
  for (int i = 0; i < 100'000; ++i) {
    first += eco::compete(ctx(1, 7, 0, 1), ctx(1, 3, 0, 1), Competition::MajorityProbabilistic, prob) == Winner::First;
  }
  ok &= std::abs(first / 1e5 - 0.7) < 0.02;
  const bool winners_ok = ok;

  // Antisymmetry: swapping arguments swaps the winner.
  Rng gen(12);
  bool antisym = true;
  for (Competition fn : eco::all_competitions()) {
    if (fn == Competition::MajorityProbabilistic) continue;
    for (int i = 0; i < 2000; ++i) {
      auto a = ctx(gen.uniform(0, 10), static_cast<int>(gen.below(10)), gen.uniform01(), 1 + gen.below(4));
      auto b = ctx(gen.uniform(0, 10), static_cast<int>(gen.below(10)), gen.uniform01(), 1 + gen.below(4));
      a.pos = uniform_position(gen, 50);
      b.pos = uniform_position(gen, 50);
      b.vel = {gen.uniform(-2, 2), gen.uniform(-2, 2)};
      FixedCoin lo(0.25), hi(0.75);
      antisym &= eco::compete(a, b, fn, lo) != eco::compete(b, a, fn, hi);
    }
  }
  Rng pa(1);
  int ab = 0, ba = 0;
  for (int i = 0; i < 100'000; ++i) {
    ab += eco::compete(ctx(1, 6, 0, 1), ctx(1, 4, 0, 1), Competition::MajorityProbabilistic, pa) == Winner::First;
    ba += eco::compete(ctx(1, 4, 0, 1), ctx(1, 6, 0, 1), Competition::MajorityProbabilistic, pa) == Winner::Second;
  }
  antisym &= std::abs(ab - ba) / 1e5 < 0.01;

  // Tie fairness.
  bool fair = true;
  double worst = 0.0;
  for (Competition fn : eco::all_competitions()) {
    Rng rng(static_cast<std::uint64_t>(fn) * 7 + 1);
    int wins = 0;
    for (int i = 0; i < 10'000; ++i) wins += eco::compete(ctx(2, 4, 0.5, 3), ctx(2, 4, 0.5, 3), fn, rng) == Winner::First;
    const double dev = std::abs(wins / 1e4 - 0.5);
    worst = std::max(worst, dev);
    fair &= dev <= 0.02;
  }
  return {winners_ok && antisym && fair,
          std::to_string(stated) + " stated winners " + (winners_ok ? "ok" : "WRONG") +
              ", antisymmetry " + (antisym ? "ok" : "BROKEN") + ", worst tie deviation " +
              fmt("%.4f", worst)};
}

// --- mutation expectation ---------------------------------------------------------------------------

Outcome mutation_expectation() {
  const Recipe fig = parse_recipe(lab::kDefaultDesignedRecipe);
  bool ok = true;
  std::string detail;
  for (double add_rate : {0.10, 0.50}) {
    Rng rng(add_rate == 0.10 ? 10 : 50);
    const int n = 100'000;
    long delta = 0;
    for (int i = 0; i < n; ++i) {
      delta += static_cast<long>(eco::mutate_recipe(fig, rng, add_rate).size()) - 4;
    }
    const double expected = 4 * eco::kDuplicationRate - 4 * eco::kDeletionRate + add_rate;
    const double mean = delta / double(n);
    ok &= std::abs(mean - expected) <= 0.02;
    detail += fmt("add_rate %.2f: ", add_rate) + fmt("mean %+.4f ", mean) + fmt("(expected %+.2f); ", expected);
  }
  return {ok, detail};
}

// --- metric oracles -----------------------------------------------------------------------------------

metrics::Bitmap scatter(std::size_t n, double x0, double y0, double w, std::uint64_t seed) {
  metrics::Bitmap b(500, 500);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    b.set(static_cast<int>(rng.uniform(x0, x0 + w)), static_cast<int>(rng.uniform(y0, y0 + w)),
          metrics::Rgb{10, 20, 30});
  }
  return b;
}

Outcome metric_oracles() {
  bool nonneg = true;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double w = rng.uniform(1.0, 500.0);
    const auto b = scatter(2 + rng.below(5000), rng.uniform(0, 500 - w), rng.uniform(0, 500 - w), w, i);
    nonneg &= metrics::structuredness(b, rng.next_u64()) >= 0.0;
  }
  const auto& ref = metrics::reference_histogram(500, 500);
  const double self = metrics::kl_divergence(metrics::uniform_reference_histogram(500, 500, 1'000'000, 777), ref);
  const double uniform_scatter = metrics::structuredness(scatter(50'000, 0, 0, 500, 9), 1);
  const double cluster = metrics::structuredness(scatter(500, 245, 245, 5, 9), 1);

  const std::vector<std::vector<std::uint32_t>> seq{{1, 2}, {1, 2}, {1, 3}, {}, {4, 5, 6, 1}};
  const bool exploration = metrics::exploration_series(seq) == std::vector<int>{2, 0, 1, 0, 3};

  const bool ok = nonneg && self < 0.01 && uniform_scatter < 0.01 && cluster > 1.0 && exploration;
  return {ok, std::string("KL>=0 on 200 fixtures ") + (nonneg ? "ok" : "FAIL") +
                  fmt(", reference self-divergence %.5f", self) +
                  fmt(", uniform scatter %.5f", uniform_scatter) + fmt(", tight cluster %.3f", cluster) +
                  ", exploration " + (exploration ? "exact" : "WRONG")};
}

// --- desk-scale trend ------------------------------------------------------------------------------------

constexpr eco::InitialScale kDesk{1000, 10, 1500};
constexpr std::uint64_t kDeskSteps = 10'000;
constexpr std::uint64_t kSnapEvery = 500;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

double window_mean(const std::vector<metrics::MetricRow>& rows, std::uint64_t lo, std::uint64_t hi,
                   bool structure) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.step < lo || r.step > hi) continue;
    const double v = structure ? r.kl_divergence : r.new_colors;
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n ? sum / n : std::nan("");
}

double at_step(const std::vector<metrics::MetricRow>& rows, std::uint64_t step) {
  for (const auto& r : rows) {
    if (r.step == step) return r.kl_divergence;
  }
  return std::nan("");
}

std::pair<Outcome, Outcome> desk_trends() {
  const auto t0 = Clock::now();
  std::map<std::string, std::vector<std::vector<metrics::MetricRow>>> series;
  for (const auto& cond : eco::condition_names()) {
    for (auto seed : kSeeds) {
      lab::RunConfig cfg = lab::preset_run_config(cond, "random");
      cfg.scale = kDesk;
      const auto snaps = lab::simulate(cfg, seed, kDeskSteps, kSnapEvery);
      series[cond].push_back(metrics::metric_series(snaps, seed));
      std::printf("  run %-14s seed %llu done (%.0f s)\n", cond.c_str(),
                  static_cast<unsigned long long>(seed), seconds_since(t0));
      std::fflush(stdout);
    }
  }
  const double secs = seconds_since(t0);

  // (a) exploration, averaged over steps 2000-10000.
  int a_seeds = 0;
  std::string a_detail;
  for (std::size_t s = 0; s < kSeeds.size(); ++s) {
    std::map<std::string, double> e;
    for (const auto& cond : eco::condition_names()) e[cond] = window_mean(series[cond][s], 2000, kDeskSteps, false);
    const double high_min = std::min(e["original-high"], e["revised-high"]);
    const double low_max = std::max(e["original-low"], e["revised-low"]);
    a_seeds += high_min > low_max;
    a_detail += fmt(" [ol %.1f ", e["original-low"]) + fmt("oh %.1f ", e["original-high"]) +
                fmt("rl %.1f ", e["revised-low"]) + fmt("rh %.1f]", e["revised-high"]);
  }

  // (b) structuredness over steps 8000-10000 relative to step 2000.
  int b_seeds = 0;
  std::string b_detail;
  for (std::size_t s = 0; s < kSeeds.size(); ++s) {
    const auto& rh = series["revised-high"][s];
    const auto& oh = series["original-high"][s];
    const double rh_ratio = window_mean(rh, 8000, kDeskSteps, true) / at_step(rh, 2000);
    const double oh_ratio = window_mean(oh, 8000, kDeskSteps, true) / at_step(oh, 2000);
    b_seeds += rh_ratio >= 0.5 && oh_ratio < 0.5;
    b_detail += fmt(" [rh %.2f ", rh_ratio) + fmt("oh %.2f]", oh_ratio);
  }

  const bool in_budget = secs < 1800.0;
  Outcome a{a_seeds >= 4 && in_budget, std::to_string(a_seeds) + "/5 seeds high > low;" + a_detail};
  Outcome b{b_seeds >= 4 && in_budget, std::to_string(b_seeds) + "/5 seeds (late/step-2000 ratio);" + b_detail +
                                           fmt("; 20 runs in %.0f s", secs)};
  return {a, b};
}

// --- qualitative sanity ---------------------------------------------------------------------------------

Outcome faster_homogenizes() {
  const auto t0 = Clock::now();
  int seeds_ok = 0;
  std::string detail;
  for (auto seed : kSeeds) {
    std::map<eco::Competition, double> size;
    for (auto fn : {eco::Competition::Faster, eco::Competition::MajorityRelative}) {
      // Low mutation with the range-dependent collision rule.
      lab::RunConfig cfg = lab::preset_run_config("original-low", "designed");
      cfg.eco.competition = fn;
      cfg.scale = kDesk;
      double last = 0.0;
      lab::simulate(cfg, seed, kDeskSteps, kDeskSteps, [&](const World& w, const metrics::Bitmap& b) {
        if (b.step() == kDeskSteps) last = metrics::mean_same_type_cluster_size(w, 30.0);
      });
      size[fn] = last;
    }
    seeds_ok += size[eco::Competition::Faster] < size[eco::Competition::MajorityRelative];
    detail += fmt(" [faster %.2f ", size[eco::Competition::Faster]) +
              fmt("majority_relative %.2f]", size[eco::Competition::MajorityRelative]);
  }
  return {seeds_ok >= 4, std::to_string(seeds_ok) + "/5 seeds (original-low, designed);" + detail + fmt("; %.0f s", seconds_since(t0))};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  int failures = 0;
  const auto report = [&](const char* name, const Outcome& o) {
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  const std::vector<Criterion> quick{
      {"kinetics-oracle", kinetics_oracle},
      {"determinism", determinism},
      {"invariant-suite", invariant_suite},
      {"codec", codec},
      {"differentiation-frequencies", differentiation},
      {"competition", competition},
      {"mutation-expectation", mutation_expectation},
      {"metric-oracles", metric_oracles},
  };
  for (const auto& c : quick) {
    try {
      report(c.name, c.run());
    } catch (const std::exception& e) {
      report(c.name, {false, std::string("exception: ") + e.what()});
    }
  }
  try {
    const auto [a, b] = desk_trends();
    report("desk-trend-exploration", a);
    report("desk-trend-structuredness", b);
  } catch (const std::exception& e) {
    report("desk-trend-exploration", {false, e.what()});
    report("desk-trend-structuredness", {false, e.what()});
  }
  try {
    report("qualitative-faster-homogenizes", faster_homogenizes());
  } catch (const std::exception& e) {
    report("qualitative-faster-homogenizes", {false, e.what()});
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
