#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "swarmchem/eco.hpp"
#include "swarmchem/metrics.hpp"

namespace swarmchem::lab {

/// The four-type example recipe used when a designed run names no recipe.
extern const char* const kDefaultDesignedRecipe;

/// Everything needed to reproduce an eco-evolution run apart from the seed.
struct RunConfig {
  std::string condition = "custom";
  eco::EcoConfig eco;
  eco::InitialKind init = eco::InitialKind::Random;
  std::optional<Recipe> designed_recipe;
  eco::InitialScale scale;
  KineticsConfig kinetics;
  int render_width = metrics::kDefaultRenderSize;
  int render_height = metrics::kDefaultRenderSize;
};

/// Run config JSON (all keys optional):
///
///   {
///     "preset": "revised-high",           // eco preset, also the default condition name
///     "condition": "revised-high",
///     "eco": { ...eco config keys... },   // overrides on top of the preset
///     "init": "random" | "designed",
///     "recipe": "97 * (...)\n...",        // designed recipe text, or
///     "recipe_file": "path.recipe",       // relative to the config file
///     "world": {"side": 5000, "particles": 10000, "random_active": 100},
///     "kinetics": {"stray_magnitude": 0.5, "random_kick": 5, "min_separation": 0.001},
///     "render": {"width": 500, "height": 500}
///   }
///
/// Throws std::invalid_argument (or RecipeParseError) on bad input.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Run config for a named condition preset with the given initial condition.
/// `init` is "random", "designed" or "designed:<recipe path>".
RunConfig preset_run_config(const std::string& condition, const std::string& init);

struct RunManifest {
  std::string run_id;
  std::string condition;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::filesystem::path snapshot_dir;
  std::filesystem::path metrics_csv;
  std::uint64_t start_step = 0;
  std::uint64_t end_step = 0;
  std::vector<std::uint64_t> snapshot_steps;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
/// Reads <dir>/manifest.json.
RunManifest load_manifest(const std::filesystem::path& run_dir);

using SnapshotCallback = std::function<void(const World&, const metrics::Bitmap&)>;

/// Runs `steps` eco steps, rendering at step 0 and every `snap_every` steps
/// (and at the last step). Returns the rendered snapshots in order.
std::vector<metrics::Bitmap> simulate(const RunConfig& config, std::uint64_t seed,
                                      std::uint64_t steps, std::uint64_t snap_every,
                                      const SnapshotCallback& on_snapshot = {});

/// Headless run into `out_dir`: snap_<step>.ppm files, metrics.csv, and
/// finally manifest.json via write-then-rename. A directory without
/// manifest.json is an incomplete run.
RunManifest run_experiment(const RunConfig& config, std::uint64_t seed, std::uint64_t steps,
                           std::uint64_t snap_every, const std::filesystem::path& out_dir,
                           const std::string& run_id = "run");

struct SweepSpec {
  std::vector<std::string> conditions;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inits{"random"};
  std::uint64_t steps = 30'000;
  std::uint64_t snap_every = 500;
  std::filesystem::path out_dir;
  std::optional<eco::InitialScale> scale;
  std::uint64_t window_start = metrics::kSummaryWindowStart;
  std::uint64_t window_end = metrics::kSummaryWindowEnd;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct SweepFailure {
  std::string run_id;
  std::string error;
};

struct SweepResult {
  std::vector<RunManifest> manifests;
  std::vector<SweepFailure> failures;
  std::vector<metrics::SummaryRow> summary;
};

/// conditions x inits x seeds runs under out_dir/<run id>/, then summary.csv
/// (and failures.csv when any run failed). A failing run does not stop the others.
SweepResult run_sweep(const SweepSpec& spec);

std::string sweep_run_id(const std::string& condition, const std::string& init, std::uint64_t seed);

/// Metrics for a directory of snap_<step>.ppm files.
std::vector<metrics::MetricRow> metrics_for_snapshot_dir(const std::filesystem::path& dir,
                                                         std::uint64_t seed = 0);

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace swarmchem::lab
