#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "swarmchem/eco_config.hpp"
#include "swarmchem/lab.hpp"
#include "swarmchem/ppm.hpp"

using namespace swarmchem;
using namespace swarmchem::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("swarmchem_lab_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small(const std::string& condition, const std::string& init = "random") {
  RunConfig c = preset_run_config(condition, init);
  c.scale = {400, 8, 600};
  return c;
}

}  // namespace

TEST_CASE("preset run configs") {
  const RunConfig c = preset_run_config("revised-high", "random");
  CHECK(c.condition == "revised-high");
  CHECK(c.eco.collision_mode == eco::CollisionMode::Revised);
  CHECK(c.eco.p_transmit == doctest::Approx(0.1));
  CHECK(c.eco.perturbation.interval > 0);
  CHECK(c.init == eco::InitialKind::Random);

  const RunConfig d = preset_run_config("original-low", "designed");
  CHECK(d.init == eco::InitialKind::Designed);
  REQUIRE(d.designed_recipe);
  CHECK(*d.designed_recipe == parse_recipe(kDefaultDesignedRecipe));
  CHECK_THROWS(preset_run_config("original-low", "designed:/no/such/file.recipe"));
  CHECK_THROWS(preset_run_config("nope", "random"));
}

TEST_CASE("run config JSON") {
  const fs::path dir = scratch_dir("config");
  std::ofstream(dir / "two.recipe") << "10 * (50, 2, 5, 0.2, 0.3, 10, 0.1, 0.5)\n";
  std::ofstream(dir / "run.json") << R"({
    "preset": "original-high",
    "eco": {"competition": "faster"},
    "init": "designed",
    "recipe_file": "two.recipe",
    "world": {"side": 800, "particles": 500},
    "render": {"width": 200, "height": 100}
  })";
  const RunConfig c = load_run_config(dir / "run.json");
  CHECK(c.condition == "original-high");
  CHECK(c.eco.collision_mode == eco::CollisionMode::Original);
  CHECK(c.eco.competition == eco::Competition::Faster);
  REQUIRE(c.designed_recipe);
  CHECK(c.designed_recipe->size() == 1);
  CHECK(c.scale.side == 800);
  CHECK(c.scale.particles == 500);
  CHECK(c.render_width == 200);
  CHECK(c.render_height == 100);

  const RunConfig back = run_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));

  CHECK_THROWS(run_config_from_json(nlohmann::json::parse(R"({"wrold": {}})")));
  CHECK_THROWS(run_config_from_json(nlohmann::json::parse(R"({"init": "sideways"})")));
  fs::remove_all(dir);
}

TEST_CASE("zero steps gives a single initial snapshot") {
  const fs::path dir = scratch_dir("zero");
  const RunManifest m = run_experiment(small("revised-low"), 3, 0, 500, dir / "run", "run");
  CHECK(m.snapshot_steps == std::vector<std::uint64_t>{0});
  CHECK(m.start_step == 0);
  CHECK(m.end_step == 0);
  CHECK(fs::exists(dir / "run" / "snap_0.ppm"));
  CHECK(fs::exists(dir / "run" / "manifest.json"));
  const RunManifest loaded = load_manifest(dir / "run");
  CHECK(loaded.run_id == "run");
  CHECK(loaded.seed == 3);
  CHECK(loaded.snapshot_steps == m.snapshot_steps);
  fs::remove_all(dir);
}

TEST_CASE("snapshots land on the interval and the final step") {
  const auto snaps = simulate(small("revised-high"), 1, 1200, 500);
  REQUIRE(snaps.size() == 4);
  CHECK(snaps[0].step() == 0);
  CHECK(snaps[1].step() == 500);
  CHECK(snaps[2].step() == 1000);
  CHECK(snaps[3].step() == 1200);
}

TEST_CASE("same seed and config give byte-identical snapshots") {
  const fs::path dir = scratch_dir("determinism");
  const RunConfig cfg = small("original-high");
  run_experiment(cfg, 17, 1000, 250, dir / "a", "a");
  run_experiment(cfg, 17, 1000, 250, dir / "b", "b");
  run_experiment(cfg, 18, 1000, 250, dir / "c", "c");
  bool differs_from_other_seed = false;
  for (std::uint64_t s = 0; s <= 1000; s += 250) {
    const auto name = metrics::snapshot_filename(s);
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    differs_from_other_seed |= slurp(dir / "a" / name) != slurp(dir / "c" / name);
  }
  CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));
  CHECK(differs_from_other_seed);
  fs::remove_all(dir);
}

TEST_CASE("the manifest is the last file written") {
  const fs::path dir = scratch_dir("manifest");
  run_experiment(small("revised-low"), 2, 600, 200, dir / "run", "run");
  const auto manifest_time = fs::last_write_time(dir / "run" / "manifest.json");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "run")) {
    ++files;
    CHECK(e.path().extension() != ".tmp");
    CHECK(fs::last_write_time(e.path()) <= manifest_time);
  }
  CHECK(files == 6);  // 4 snapshots, metrics.csv, manifest.json
  fs::remove_all(dir);
}

TEST_CASE("metrics recomputed from disk match the run") {
  const fs::path dir = scratch_dir("metrics");
  run_experiment(small("revised-high"), 4, 1000, 500, dir / "run", "run");
  std::ifstream in(dir / "run" / "metrics.csv");
  const auto written = metrics::read_metric_csv(in);
  const auto recomputed = metrics_for_snapshot_dir(dir / "run", 4);
  REQUIRE(written.size() == recomputed.size());
  for (std::size_t i = 0; i < written.size(); ++i) {
    CHECK(written[i].step == recomputed[i].step);
    CHECK(written[i].new_colors == recomputed[i].new_colors);
    CHECK(written[i].kl_divergence == doctest::Approx(recomputed[i].kl_divergence));
  }
  CHECK_THROWS(metrics_for_snapshot_dir(dir));
  fs::remove_all(dir);
}

TEST_CASE("sweeps keep going past a failed run") {
  const fs::path dir = scratch_dir("sweep");
  SweepSpec spec;
  spec.conditions = {"original-low", "original-high", "revised-low", "revised-high"};
  spec.seeds = {1, 2, 3};
  spec.inits = {"random"};
  spec.steps = 400;
  spec.snap_every = 100;
  spec.window_start = 200;
  spec.window_end = 400;
  spec.scale = eco::InitialScale{300, 6, 500};
  spec.out_dir = dir / "ok";
  spec.threads = 2;
  const SweepResult ok = run_sweep(spec);
  CHECK(ok.manifests.size() == 12);
  CHECK(ok.failures.empty());
  CHECK(ok.summary.size() == 12);
  for (const auto& m : ok.manifests) CHECK(fs::exists(dir / "ok" / m.run_id / "manifest.json"));
  CHECK(fs::exists(dir / "ok" / "summary.csv"));
  CHECK_FALSE(fs::exists(dir / "ok" / "failures.csv"));
  CHECK(fs::exists(dir / "ok" / sweep_run_id("revised-high", "random", 3) / "manifest.json"));

  spec.conditions = {"revised-low"};
  spec.inits = {"random", "designed:/no/such/file.recipe"};
  spec.seeds = {1, 2};
  spec.out_dir = dir / "mixed";
  const SweepResult mixed = run_sweep(spec);
  CHECK(mixed.manifests.size() == 2);
  CHECK(mixed.failures.size() == 2);
  CHECK(mixed.summary.size() == mixed.manifests.size());
  CHECK(fs::exists(dir / "mixed" / "failures.csv"));
  std::ifstream summary(dir / "mixed" / "summary.csv");
  std::string line;
  int rows = -1;
  while (std::getline(summary, line)) ++rows;
  CHECK(rows == 2);

  spec.window_end = 500;
  CHECK_THROWS(run_sweep(spec));
  fs::remove_all(dir);
}

TEST_CASE("atomic writes replace the target") {
  const fs::path dir = scratch_dir("atomic");
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(slurp(dir / "f.txt") == "two");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  fs::remove_all(dir);
}
