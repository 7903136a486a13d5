#include "swarmchem/lab.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "swarmchem/eco_config.hpp"
#include "swarmchem/ppm.hpp"

namespace swarmchem::lab {

namespace fs = std::filesystem;

const char* const kDefaultDesignedRecipe =
    "97 * (226.76, 3.11, 9.61, 0.15, 0.88, 43.35, 0.44, 1.0)\n"
    "38 * (57.47, 9.99, 35.18, 0.15, 0.37, 30.96, 0.05, 0.31)\n"
    "56 * (15.25, 13.58, 3.82, 0.3, 0.8, 39.51, 0.43, 0.65)\n"
    "31 * (113.21, 18.25, 38.21, 0.62, 0.46, 15.78, 0.49, 0.61)\n";

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("bad value for '") + key + "'");
  }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  reject_unknown(j,
                 {"preset", "condition", "eco", "init", "recipe", "recipe_file", "world",
                  "kinetics", "render"},
                 "run config");
  RunConfig c;
  nlohmann::json eco_json = j.value("eco", nlohmann::json::object());
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (eco_json.contains("preset")) throw std::invalid_argument("preset given twice");
    eco_json["preset"] = preset;
    c.condition = preset;
  }
  c.eco = eco::eco_config_from_json(eco_json);
  read(j, "condition", c.condition);
  if (j.contains("init")) c.init = eco::initial_kind_from_string(j.at("init").get<std::string>());

  if (j.contains("recipe") && j.contains("recipe_file")) {
    throw std::invalid_argument("give either recipe or recipe_file, not both");
  }
  if (j.contains("recipe")) {
    c.designed_recipe = parse_recipe(j.at("recipe").get<std::string>());
  } else if (j.contains("recipe_file")) {
    fs::path p = j.at("recipe_file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    c.designed_recipe = parse_recipe(read_text(p));
  } else if (c.init == eco::InitialKind::Designed) {
    c.designed_recipe = parse_recipe(kDefaultDesignedRecipe);
  }

  if (j.contains("world")) {
    const auto& w = j.at("world");
    reject_unknown(w, {"side", "particles", "random_active"}, "world");
    read(w, "side", c.scale.side);
    read(w, "particles", c.scale.particles);
    read(w, "random_active", c.scale.random_active);
  }
  if (j.contains("kinetics")) {
    const auto& k = j.at("kinetics");
    reject_unknown(k, {"stray_magnitude", "random_kick", "min_separation"}, "kinetics");
    read(k, "stray_magnitude", c.kinetics.stray_magnitude);
    read(k, "random_kick", c.kinetics.random_kick);
    read(k, "min_separation", c.kinetics.min_separation);
  }
  if (j.contains("render")) {
    const auto& r = j.at("render");
    reject_unknown(r, {"width", "height"}, "render");
    read(r, "width", c.render_width);
    read(r, "height", c.render_height);
  }
  if (!(c.scale.side > 0.0)) throw std::invalid_argument("world.side must be positive");
  if (c.scale.particles == 0) throw std::invalid_argument("world.particles must be positive");
  if (c.scale.random_active > c.scale.particles) {
    throw std::invalid_argument("world.random_active exceeds world.particles");
  }
  if (c.render_width <= 0 || c.render_height <= 0) {
    throw std::invalid_argument("render size must be positive");
  }
  if (!(c.kinetics.min_separation > 0.0)) {
    throw std::invalid_argument("kinetics.min_separation must be positive");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j{
      {"condition", c.condition},
      {"eco", eco::to_json(c.eco)},
      {"init", std::string(eco::to_string(c.init))},
      {"world",
       {{"side", c.scale.side},
        {"particles", c.scale.particles},
        {"random_active", c.scale.random_active}}},
      {"kinetics",
       {{"stray_magnitude", c.kinetics.stray_magnitude},
        {"random_kick", c.kinetics.random_kick},
        {"min_separation", c.kinetics.min_separation}}},
      {"render", {{"width", c.render_width}, {"height", c.render_height}}},
  };
  if (c.designed_recipe) j["recipe"] = serialize_recipe(*c.designed_recipe);
  return j;
}

RunConfig preset_run_config(const std::string& condition, const std::string& init) {
  RunConfig c;
  c.condition = condition;
  c.eco = eco::condition_preset(condition);
  if (init == "random") {
    c.init = eco::InitialKind::Random;
  } else if (init == "designed") {
    c.init = eco::InitialKind::Designed;
    c.designed_recipe = parse_recipe(kDefaultDesignedRecipe);
  } else if (init.starts_with("designed:")) {
    c.init = eco::InitialKind::Designed;
    c.designed_recipe = parse_recipe(read_text(init.substr(9)));
  } else {
    throw std::invalid_argument("unknown initial condition '" + init + "'");
  }
  return c;
}

nlohmann::json to_json(const RunManifest& m) {
  return {
      {"run_id", m.run_id},
      {"condition", m.condition},
      {"seed", m.seed},
      {"config", m.config},
      {"snapshot_dir", m.snapshot_dir.string()},
      {"metrics_csv", m.metrics_csv.string()},
      {"start_step", m.start_step},
      {"end_step", m.end_step},
      {"snapshot_steps", m.snapshot_steps},
  };
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.condition = j.at("condition").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config = j.at("config");
  m.snapshot_dir = j.at("snapshot_dir").get<std::string>();
  m.metrics_csv = j.at("metrics_csv").get<std::string>();
  m.start_step = j.at("start_step").get<std::uint64_t>();
  m.end_step = j.at("end_step").get<std::uint64_t>();
  m.snapshot_steps = j.at("snapshot_steps").get<std::vector<std::uint64_t>>();
  return m;
}

RunManifest load_manifest(const fs::path& run_dir) {
  return manifest_from_json(nlohmann::json::parse(read_text(run_dir / "manifest.json")));
}

std::vector<metrics::Bitmap> simulate(const RunConfig& config, std::uint64_t seed,
                                      std::uint64_t steps, std::uint64_t snap_every,
                                      const SnapshotCallback& on_snapshot) {
  if (snap_every == 0) throw std::invalid_argument("snapshot interval must be positive");
  World world = eco::make_initial_world(config.init, config.designed_recipe, seed, config.scale);
  world.kinetics = config.kinetics;
  eco::EcoSimulation sim(std::move(world), config.eco);

  std::vector<metrics::Bitmap> snapshots;
  auto snap = [&] {
    snapshots.push_back(metrics::render(sim.world(), config.render_width, config.render_height));
    if (on_snapshot) on_snapshot(sim.world(), snapshots.back());
  };
  snap();
  for (std::uint64_t s = 1; s <= steps; ++s) {
    sim.advance();
    if (s % snap_every == 0 || s == steps) snap();
  }
  return snapshots;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunManifest run_experiment(const RunConfig& config, std::uint64_t seed, std::uint64_t steps,
                           std::uint64_t snap_every, const fs::path& out_dir,
                           const std::string& run_id) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw std::runtime_error("cannot create output directory " + out_dir.string());
  }
  fs::remove(out_dir / "manifest.json", ec);
  {
    // Probe writability before spending time on the simulation.
    const auto probe = out_dir / ".probe";
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory " + out_dir.string() + " is not writable");
    out.close();
    fs::remove(probe, ec);
  }

  RunManifest m;
  m.run_id = run_id;
  m.condition = config.condition;
  m.seed = seed;
  m.config = to_json(config);
  m.snapshot_dir = out_dir;
  m.metrics_csv = out_dir / "metrics.csv";

  const auto snapshots =
      simulate(config, seed, steps, snap_every, [&](const World&, const metrics::Bitmap& bmp) {
        metrics::write_ppm(out_dir / metrics::snapshot_filename(bmp.step()), bmp);
        m.snapshot_steps.push_back(bmp.step());
      });
  m.start_step = snapshots.front().step();
  m.end_step = snapshots.back().step();

  const auto rows = metrics::metric_series(snapshots, seed);
  std::ostringstream csv;
  metrics::write_metric_csv(csv, rows);
  write_file_atomic(m.metrics_csv, csv.str());
  write_file_atomic(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

std::string sweep_run_id(const std::string& condition, const std::string& init,
                         std::uint64_t seed) {
  std::string label = init;
  if (label.starts_with("designed:")) {
    label = "designed-" + fs::path(label.substr(9)).stem().string();
  }
  return condition + "_" + label + "_s" + std::to_string(seed);
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.window_end > spec.steps) {
    throw std::invalid_argument("summary window ends after the last step");
  }
  struct Job {
    std::string condition;
    std::string init;
    std::uint64_t seed;
    std::string run_id;
  };
  std::vector<Job> jobs;
  for (const auto& c : spec.conditions) {
    for (const auto& init : spec.inits) {
      for (auto seed : spec.seeds) jobs.push_back({c, init, seed, sweep_run_id(c, init, seed)});
    }
  }
  fs::create_directories(spec.out_dir);

  struct Outcome {
    std::optional<RunManifest> manifest;
    std::vector<metrics::MetricRow> rows;
    std::string error;
  };
  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& job = jobs[k];
      try {
        RunConfig config = preset_run_config(job.condition, job.init);
        if (spec.scale) config.scale = *spec.scale;
        outcomes[k].manifest = run_experiment(config, job.seed, spec.steps, spec.snap_every,
                                              spec.out_dir / job.run_id, job.run_id);
        std::ifstream in(outcomes[k].manifest->metrics_csv);
        outcomes[k].rows = metrics::read_metric_csv(in);
      } catch (const std::exception& e) {
        outcomes[k].manifest.reset();
        outcomes[k].error = e.what();
      }
    }
  };
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult result;
  std::vector<metrics::RunSeries> series;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (outcomes[k].manifest) {
      result.manifests.push_back(*outcomes[k].manifest);
      series.push_back({jobs[k].condition, jobs[k].run_id, std::move(outcomes[k].rows)});
    } else {
      result.failures.push_back({jobs[k].run_id, outcomes[k].error});
    }
  }
  result.summary = metrics::condition_summary(series, spec.window_start, spec.window_end);

  std::ostringstream summary;
  metrics::write_summary_csv(summary, result.summary);
  write_file_atomic(spec.out_dir / "summary.csv", summary.str());
  if (!result.failures.empty()) {
    std::ostringstream failures;
    failures << "run_id,error\n";
    for (const auto& f : result.failures) {
      std::string msg = f.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      failures << f.run_id << ',' << msg << '\n';
    }
    write_file_atomic(spec.out_dir / "failures.csv", failures.str());
  }
  return result;
}

std::vector<metrics::MetricRow> metrics_for_snapshot_dir(const fs::path& dir, std::uint64_t seed) {
  const auto snapshots = metrics::load_snapshot_dir(dir);
  if (snapshots.empty()) throw std::invalid_argument("no snap_<step>.ppm files in " + dir.string());
  return metrics::metric_series(snapshots, seed);
}

}  // namespace swarmchem::lab
