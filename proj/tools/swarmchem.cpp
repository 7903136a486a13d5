#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "swarmchem/lab.hpp"
#include "swarmchem/server.hpp"

namespace fs = std::filesystem;
using namespace swarmchem;

namespace {

lab::SessionServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int run_cmd(const fs::path& config_path, std::uint64_t seed, std::uint64_t steps,
            std::uint64_t snap_every, const fs::path& out) {
  const auto cfg = lab::load_run_config(config_path);
  const auto manifest = lab::run_experiment(cfg, seed, steps, snap_every, out, out.filename().string());
  std::cout << "wrote " << manifest.snapshot_steps.size() << " snapshots to " << out.string() << "\n";
  return 0;
}

int sweep_cmd(lab::SweepSpec spec, std::optional<std::uint64_t> particles,
              std::optional<double> side, std::optional<std::uint64_t> random_active) {
  if (particles || side || random_active) {
    eco::InitialScale scale;
    if (particles) scale.particles = *particles;
    if (side) scale.side = *side;
    if (random_active) scale.random_active = *random_active;
    spec.scale = scale;
  }
  const auto result = lab::run_sweep(spec);
  std::cout << result.manifests.size() << " runs completed, " << result.failures.size()
            << " failed\n";
  for (const auto& f : result.failures) std::cerr << f.run_id << ": " << f.error << "\n";
  std::cout << "summary: " << (spec.out_dir / "summary.csv").string() << "\n";
  return result.failures.empty() ? 0 : 3;
}

int metrics_cmd(const fs::path& dir, const std::string& out, std::uint64_t seed) {
  const auto rows = lab::metrics_for_snapshot_dir(dir, seed);
  if (out.empty()) {
    metrics::write_metric_csv(std::cout, rows);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    metrics::write_metric_csv(f, rows);
  }
  return 0;
}

int serve_cmd(const std::string& bind, double fps, std::uint64_t steps_per_frame) {
  lab::ServerOptions options;
  options.frames_per_second = fps;
  options.steps_per_frame = steps_per_frame;
  lab::SessionServer server(options);
  server.start(bind);
  std::cout << "listening on port " << server.port() << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.wait();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm chemistry simulator and experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one eco-evolution experiment");
  fs::path config_path, run_out;
  std::uint64_t seed = 0, steps = 30'000, snap_every = 500;
  run->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Random seed")->required();
  run->add_option("--steps", steps, "Number of steps")->capture_default_str();
  run->add_option("--snap-every", snap_every, "Snapshot interval")->capture_default_str();
  run->add_option("--out", run_out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run conditions x inits x seeds and summarise");
  lab::SweepSpec spec;
  std::optional<std::uint64_t> particles, random_active;
  std::optional<double> side;
  sweep->add_option("--conditions", spec.conditions, "Condition presets")->required()->delimiter(',');
  sweep->add_option("--seeds", spec.seeds, "Seeds")->required()->delimiter(',');
  sweep->add_option("--inits", spec.inits, "random | designed | designed:<recipe file>")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--out", spec.out_dir, "Output directory")->required();
  sweep->add_option("--steps", spec.steps)->capture_default_str();
  sweep->add_option("--snap-every", spec.snap_every)->capture_default_str();
  sweep->add_option("--particles", particles, "Override total particle count");
  sweep->add_option("--side", side, "Override world side length");
  sweep->add_option("--random-active", random_active, "Override active count for random init");
  sweep->add_option("--window-start", spec.window_start)->capture_default_str();
  sweep->add_option("--window-end", spec.window_end)->capture_default_str();
  sweep->add_option("--threads", spec.threads, "Worker threads (0 = all cores)")->capture_default_str();

  auto* met = app.add_subcommand("metrics", "Compute metrics for a snapshot directory");
  fs::path snapshots;
  std::string metrics_out;
  std::uint64_t metrics_seed = 0;
  met->add_option("--snapshots", snapshots, "Directory of snap_<step>.ppm")
      ->required()
      ->check(CLI::ExistingDirectory);
  met->add_option("--out", metrics_out, "CSV path (stdout if omitted)");
  met->add_option("--seed", metrics_seed, "Seed for pair sampling")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over TCP");
  std::string bind = "127.0.0.1:7070";
  double fps = 20.0;
  std::uint64_t steps_per_frame = 1;
  serve->add_option("--bind", bind, "host:port")->capture_default_str();
  serve->add_option("--fps", fps, "Frames per second")->capture_default_str();
  serve->add_option("--steps-per-frame", steps_per_frame)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_cmd(config_path, seed, steps, snap_every, run_out);
    if (*sweep) return sweep_cmd(spec, particles, side, random_active);
    if (*met) return metrics_cmd(snapshots, metrics_out, metrics_seed);
    if (*serve) return serve_cmd(bind, fps, steps_per_frame);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
