#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "swarmchem/metrics.hpp"
#include "swarmchem/ppm.hpp"

using namespace swarmchem;
using namespace swarmchem::metrics;
namespace fs = std::filesystem;

namespace {

constexpr Rgb kRed{255, 0, 0};
constexpr Rgb kBlue{0, 0, 255};
constexpr Rgb kGreen{0, 255, 0};

Bitmap with_colors(std::initializer_list<Rgb> colors, std::uint64_t step = 0) {
  Bitmap b(20, 20, step);
  int x = 0;
  for (Rgb c : colors) b.set(x++, 3, c);
  return b;
}

RecipePtr one_type(double radius) {
  return std::make_shared<const Recipe>(
      std::vector<RecipeEntry>{{1, {radius, 1, 2, 0.1, 0.1, 1, 0.1, 0.1}}});
}

Bitmap scatter(std::size_t n, Vec2 lo, Vec2 hi, std::uint64_t seed, int size = 500) {
  Bitmap b(size, size);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const int x = static_cast<int>(rng.uniform(lo.x, hi.x));
    const int y = static_cast<int>(rng.uniform(lo.y, hi.y));
    b.set(x, y, kRed);
  }
  return b;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("swarmchem_metrics_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("exploration counts first appearances") {
  const std::vector<Bitmap> snaps{with_colors({kRed, kBlue}), with_colors({kRed, kBlue}),
                                  with_colors({kRed, kGreen})};
  CHECK(exploration_series(snaps) == std::vector<int>{2, 0, 1});

  const std::vector<std::vector<std::uint32_t>> sets{{1, 2, 3}};
  CHECK(exploration_series(sets) == std::vector<int>{3});
  CHECK(exploration_series(std::vector<Bitmap>{Bitmap(10, 10)}) == std::vector<int>{0});
}

TEST_CASE("exploration total equals the union of colours") {
  Rng rng(4);
  std::vector<std::vector<std::uint32_t>> sets(50);
  std::set<std::uint32_t> all;
  for (auto& s : sets) {
    const auto n = rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::uint32_t>(rng.below(200));
      s.push_back(c);
      all.insert(c);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  const auto series = exploration_series(sets);
  CHECK(std::accumulate(series.begin(), series.end(), 0) == static_cast<int>(all.size()));
}

TEST_CASE("passive grey and background are not type colours") {
  const auto snaps = std::vector<Bitmap>{with_colors({kPassiveColor, kBackground, kRed})};
  CHECK(exploration_series(snaps) == std::vector<int>{1});
}

TEST_CASE("rendering") {
  World empty(1000, 1);
  CHECK(type_colors(render(empty)).empty());

  World passive(1000, 1);
  for (int i = 0; i < 50; ++i) passive.particles.push_back(make_passive({i * 20.0, 500}));
  const Bitmap pb = render(passive);
  CHECK(type_colors(pb).empty());
  CHECK(pb.at(0, 250) == kPassiveColor);

  World w(1000, 1);
  const auto r = one_type(50);
  w.particles.push_back(make_passive({100, 100}));
  w.particles.push_back(make_active({100, 100}, {}, r, 0));
  w.particles.push_back(make_active({700, 300}, {}, r, 0));
  w.particles.push_back(make_active({900, 900}, {}, one_type(60), 0));
  const Bitmap b = render(w);
  CHECK(b.width() == 500);
  CHECK(b.height() == 500);
  CHECK(b.at(50, 50) == b.at(350, 150));
  CHECK(b.at(50, 50) == type_color(r->entries()[0].params));
  CHECK(b.at(450, 450) != b.at(50, 50));
  CHECK(type_colors(b).size() == 2);
  CHECK(render(w) == b);
}

TEST_CASE("type colours avoid the reserved colours") {
  Rng rng(8);
  for (int i = 0; i < 20'000; ++i) {
    const Rgb c = type_color(random_params(rng));
    REQUIRE(c != kBackground);
    REQUIRE(c != kPassiveColor);
  }
  KineticParams p{10, 1, 2, 0.1, 0.2, 3, 0.1, 0.5};
  KineticParams q = p;
  q.alignment += 1e-7;
  CHECK(type_color(p) == type_color(q));
}

TEST_CASE("uniform reference agrees with itself") {
  const auto& ref = reference_histogram(500, 500);
  const auto other = uniform_reference_histogram(500, 500, 1'000'000, 12345);
  CHECK(kl_divergence(other, ref) < 0.01);
  CHECK(kl_divergence(ref, ref) == doctest::Approx(0.0));
  double total = 0;
  for (double p : ref.probabilities) total += p;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("uniform scatter has near-zero structuredness") {
  const Bitmap b = scatter(20'000, {0, 0}, {500, 500}, 3);
  CHECK(structuredness(b, 1) < 0.01);
}

TEST_CASE("a tight cluster is strongly structured") {
  const Bitmap b = scatter(300, {250, 250}, {255, 255}, 3);
  CHECK(structuredness(b, 1) > 1.0);
}

TEST_CASE("divergence is never negative") {
  Rng rng(10);
  for (int i = 0; i < 30; ++i) {
    const double x0 = rng.uniform(0, 400);
    const double y0 = rng.uniform(0, 400);
    const double w = rng.uniform(2, 500 - std::max(x0, y0));
    const Bitmap b = scatter(2 + rng.below(3000), {x0, y0}, {x0 + w, y0 + w}, i);
    CHECK(structuredness(b, rng.next_u64()) >= 0.0);
  }
}

TEST_CASE("structuredness needs two particle pixels") {
  CHECK_THROWS_AS(structuredness(Bitmap(50, 50), 1), MetricError);
  Bitmap one(50, 50);
  one.set(3, 3, kRed);
  CHECK_THROWS_AS(structuredness(one, 1), MetricError);
  const std::vector<Bitmap> snaps{one};
  const auto rows = metric_series(snaps);
  REQUIRE(rows.size() == 1);
  CHECK(std::isnan(rows[0].kl_divergence));
}

TEST_CASE("histogram bins cover the diagonal") {
  const auto& ref = reference_histogram(500, 500);
  CHECK(ref.probabilities.size() == kDistanceBins);
  CHECK(ref.bin_of(0.0) == 0);
  CHECK(ref.bin_of(ref.max_distance) == kDistanceBins - 1);
  CHECK(ref.bin_of(ref.max_distance * 0.505) == 50);
}

TEST_CASE("metric CSV round trip") {
  const std::vector<MetricRow> rows{{0, 3, 0.5}, {500, 1, std::nan("")}, {1000, 0, 1.25}};
  std::stringstream s;
  write_metric_csv(s, rows);
  CHECK(s.str().rfind("step,new_colors,kl_divergence\n", 0) == 0);
  const auto back = read_metric_csv(s);
  REQUIRE(back.size() == 3);
  CHECK(back[0].step == 0);
  CHECK(back[0].kl_divergence == 0.5);
  CHECK(std::isnan(back[1].kl_divergence));
  CHECK(back[2].new_colors == 0);
}

TEST_CASE("condition summary") {
  std::vector<RunSeries> runs;
  RunSeries flat{"a", "a1", {}};
  for (std::uint64_t s = 0; s <= 30'000; s += 500) flat.rows.push_back({s, 4, 2.0});
  runs.push_back(flat);

  RunSeries noisy{"a", "a2", {}};
  Rng rng(1);
  double sum_e = 0, sum_k = 0;
  int n_e = 0, n_k = 0;
  for (std::uint64_t s = 0; s <= 32'000; s += 500) {
    MetricRow r{s, static_cast<int>(rng.below(10)), rng.uniform01()};
    if (s % 3000 == 0) r.kl_divergence = std::nan("");
    noisy.rows.push_back(r);
    if (s >= 10'000 && s <= 30'000) {
      sum_e += r.new_colors;
      ++n_e;
      if (!std::isnan(r.kl_divergence)) {
        sum_k += r.kl_divergence;
        ++n_k;
      }
    }
  }
  runs.push_back(noisy);
  runs.push_back(RunSeries{"b", "b1", flat.rows});

  const auto summary = condition_summary(runs);
  REQUIRE(summary.size() == 3);
  CHECK(summary[0].run_id == "a1");
  CHECK(summary[0].mean_exploration == 4.0);
  CHECK(summary[0].mean_structuredness == 2.0);
  CHECK(summary[1].mean_exploration == doctest::Approx(sum_e / n_e));
  CHECK(summary[1].mean_structuredness == doctest::Approx(sum_k / n_k));
  CHECK(summary[2].condition == "b");

  RunSeries short_run{"c", "c1", {{0, 1, 1.0}, {20'000, 1, 1.0}}};
  CHECK_THROWS_AS(condition_summary(std::vector<RunSeries>{short_run}), MetricError);

  std::stringstream csv;
  write_summary_csv(csv, summary);
  CHECK(csv.str().rfind("condition,run_id,mean_exploration,mean_structuredness\n", 0) == 0);
}

TEST_CASE("PPM round trip and snapshot directories") {
  const fs::path dir = scratch_dir("ppm");
  Bitmap a = scatter(100, {0, 0}, {40, 30}, 1, 40);
  a.set_step(1500);
  write_ppm(dir / snapshot_filename(1500), a);
  Bitmap b(40, 40, 500);
  b.set(1, 1, kBlue);
  write_ppm(dir / snapshot_filename(500), b);
  Bitmap c(40, 40, 10000);
  write_ppm(dir / snapshot_filename(10000), c);
  std::ofstream(dir / "notes.txt") << "ignored";

  CHECK(read_ppm(dir / "snap_1500.ppm") == a);
  const auto loaded = load_snapshot_dir(dir);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].step() == 500);
  CHECK(loaded[1].step() == 1500);
  CHECK(loaded[2].step() == 10000);
  CHECK(loaded[0] == b);

  std::stringstream junk("P3\n1 1\n255\n0 0 0\n");
  CHECK_THROWS(read_ppm(junk));
  fs::remove_all(dir);
}

TEST_CASE("same-type cluster size") {
  World w(1000, 1);
  const auto r = one_type(50);
  const auto q = one_type(51);
  for (int i = 0; i < 5; ++i) w.particles.push_back(make_active({100.0 + 20 * i, 100}, {}, r, 0));
  for (int i = 0; i < 5; ++i) w.particles.push_back(make_active({600.0 + 20 * i, 600}, {}, r, 0));
  CHECK(mean_same_type_cluster_size(w) == doctest::Approx(5.0));
  // A different type in between does not bridge clusters.
  w.particles.push_back(make_active({120, 110}, {}, q, 0));
  CHECK(mean_same_type_cluster_size(w) == doctest::Approx(11.0 / 3.0));
  World none(1000, 1);
  CHECK(mean_same_type_cluster_size(none) == 0.0);
}
