#include "swarmchem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "swarmchem/spatial_grid.hpp"

namespace swarmchem::metrics {

Bitmap::Bitmap(int width, int height, std::uint64_t step)
    : width_(width), height_(height), step_(step) {
  if (width <= 0 || height <= 0) throw MetricError("bitmap dimensions must be positive");
  rgb_.assign(static_cast<std::size_t>(width) * height * 3, 255);
}

Rgb Bitmap::at(int x, int y) const {
  const auto k = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {rgb_[k], rgb_[k + 1], rgb_[k + 2]};
}

void Bitmap::set(int x, int y, Rgb c) {
  const auto k = (static_cast<std::size_t>(y) * width_ + x) * 3;
  rgb_[k] = c.r;
  rgb_[k + 1] = c.g;
  rgb_[k + 2] = c.b;
}

Rgb type_color(const KineticParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < KineticParams::kCount; ++i) {
    const auto q = static_cast<std::uint64_t>(std::llround(params[i] * 1e4));
    for (int b = 0; b < 8; ++b) {
      h ^= (q >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  auto packed = static_cast<std::uint32_t>((h ^ (h >> 24) ^ (h >> 48)) & 0xFFFFFF);
  if (packed == kBackground.packed() || packed == kPassiveColor.packed()) packed ^= 1;
  return Rgb::unpack(packed);
}

namespace {

int to_pixel(double coord, double side, int size) {
  const int p = static_cast<int>(std::floor(coord * size / side));
  return std::clamp(p, 0, size - 1);
}

bool is_type_color(Rgb c) { return !(c == kBackground) && !(c == kPassiveColor); }

}  // namespace

Bitmap render(const World& world, int width, int height) {
  Bitmap bmp(width, height, world.t);
  for (const auto& p : world.particles) {
    if (p.active) continue;
    bmp.set(to_pixel(p.pos.x, world.side, width), to_pixel(p.pos.y, world.side, height),
            kPassiveColor);
  }
  for (const auto& p : world.particles) {
    if (!p.active) continue;
    bmp.set(to_pixel(p.pos.x, world.side, width), to_pixel(p.pos.y, world.side, height),
            type_color(p.params));
  }
  return bmp;
}

std::vector<std::uint32_t> type_colors(const Bitmap& bitmap) {
  std::vector<std::uint32_t> out;
  for (int y = 0; y < bitmap.height(); ++y) {
    for (int x = 0; x < bitmap.width(); ++x) {
      const Rgb c = bitmap.at(x, y);
      if (is_type_color(c)) out.push_back(c.packed());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> exploration_series(std::span<const std::vector<std::uint32_t>> color_sets) {
  std::unordered_set<std::uint32_t> seen;
  std::vector<int> out;
  out.reserve(color_sets.size());
  for (const auto& colors : color_sets) {
    int fresh = 0;
    for (auto c : colors) {
      if (c == kBackground.packed() || c == kPassiveColor.packed()) continue;
      if (seen.insert(c).second) ++fresh;
    }
    out.push_back(fresh);
  }
  return out;
}

std::vector<int> exploration_series(std::span<const Bitmap> snapshots) {
  std::vector<std::vector<std::uint32_t>> sets;
  sets.reserve(snapshots.size());
  for (const auto& s : snapshots) sets.push_back(type_colors(s));
  return exploration_series(std::span<const std::vector<std::uint32_t>>(sets));
}

std::vector<PixelCoord> particle_pixels(const Bitmap& bitmap) {
  std::vector<PixelCoord> out;
  for (int y = 0; y < bitmap.height(); ++y) {
    for (int x = 0; x < bitmap.width(); ++x) {
      if (is_type_color(bitmap.at(x, y))) out.push_back({x, y});
    }
  }
  return out;
}

std::size_t DistanceHistogram::bin_of(double distance) const {
  const auto n = probabilities.size();
  auto k = static_cast<std::size_t>(distance / max_distance * static_cast<double>(n));
  return std::min(k, n - 1);
}

namespace {

double pixel_distance(PixelCoord a, PixelCoord b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

void normalize(std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (auto& c : counts) c /= total;
}

}  // namespace

DistanceHistogram sample_distance_histogram(std::span<const PixelCoord> coords, double max_distance,
                                            std::size_t samples, RandomSource& rng) {
  if (coords.size() < 2) throw MetricError("need at least two particle pixels");
  if (samples == 0) throw MetricError("need at least one sample");
  DistanceHistogram h{max_distance, std::vector<double>(kDistanceBins, 0.0)};
  const auto n = static_cast<std::uint64_t>(coords.size());
  for (std::size_t s = 0; s < samples; ++s) {
    const auto i = rng.below(n);
    auto j = rng.below(n - 1);
    if (j >= i) ++j;
    h.probabilities[h.bin_of(pixel_distance(coords[i], coords[j]))] += 1.0;
  }
  normalize(h.probabilities);
  return h;
}

DistanceHistogram uniform_reference_histogram(int width, int height, std::size_t pairs,
                                              std::uint64_t seed) {
  Rng rng(seed);
  const double max_distance = std::hypot(static_cast<double>(width), static_cast<double>(height));
  DistanceHistogram h{max_distance, std::vector<double>(kDistanceBins, 0.0)};
  const auto w = static_cast<std::uint64_t>(width);
  const auto hh = static_cast<std::uint64_t>(height);
  for (std::size_t s = 0; s < pairs; ++s) {
    const PixelCoord a{static_cast<int>(rng.below(w)), static_cast<int>(rng.below(hh))};
    const PixelCoord b{static_cast<int>(rng.below(w)), static_cast<int>(rng.below(hh))};
    h.probabilities[h.bin_of(pixel_distance(a, b))] += 1.0;
  }
  normalize(h.probabilities);
  return h;
}

const DistanceHistogram& reference_histogram(int width, int height) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, DistanceHistogram> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({width, height});
  if (it == cache.end()) {
    it = cache
             .emplace(std::make_pair(width, height),
                      uniform_reference_histogram(width, height, kReferencePairs,
                                                  0x5EEDF00DULL ^ mix_seed(width * 65536ULL + height)))
             .first;
  }
  return it->second;
}

double kl_divergence(const DistanceHistogram& p, const DistanceHistogram& q, double floor) {
  if (p.probabilities.size() != q.probabilities.size()) {
    throw MetricError("histograms have different bin counts");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
    const double pi = p.probabilities[i];
    if (pi <= 0.0) continue;
    d += pi * std::log(pi / std::max(q.probabilities[i], floor));
  }
  return d;
}

double structuredness(const Bitmap& bitmap, RandomSource& rng) {
  const auto coords = particle_pixels(bitmap);
  if (coords.size() < 2) throw MetricError("structuredness needs at least two particle pixels");
  const auto& ref = reference_histogram(bitmap.width(), bitmap.height());
  const auto observed = sample_distance_histogram(coords, ref.max_distance, kPairSamples, rng);
  return kl_divergence(observed, ref);
}

double structuredness(const Bitmap& bitmap, std::uint64_t seed) {
  Rng rng(seed);
  return structuredness(bitmap, rng);
}

std::vector<MetricRow> metric_series(std::span<const Bitmap> snapshots, std::uint64_t seed) {
  const auto fresh = exploration_series(snapshots);
  std::vector<MetricRow> rows;
  rows.reserve(snapshots.size());
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    MetricRow row;
    row.step = snapshots[k].step();
    row.new_colors = fresh[k];
    if (particle_pixels(snapshots[k]).size() >= 2) {
      row.kl_divergence = structuredness(snapshots[k], mix_seed(seed ^ mix_seed(row.step)));
    } else {
      row.kl_divergence = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "step,new_colors,kl_divergence\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.step << ',' << r.new_colors << ',';
    if (std::isnan(r.kl_divergence)) {
      out << "nan";
    } else {
      out << r.kl_divergence;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

std::vector<MetricRow> read_metric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "step,new_colors,kl_divergence") {
    throw MetricError("metric CSV header missing");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string step, colors, kl;
    if (!std::getline(fields, step, ',') || !std::getline(fields, colors, ',') ||
        !std::getline(fields, kl)) {
      throw MetricError("malformed metric CSV row: " + line);
    }
    try {
      rows.push_back({std::stoull(step), std::stoi(colors), std::stod(kl)});
    } catch (const std::exception&) {
      throw MetricError("malformed metric CSV row: " + line);
    }
  }
  return rows;
}

std::vector<SummaryRow> condition_summary(std::span<const RunSeries> runs,
                                          std::uint64_t window_start, std::uint64_t window_end) {
  if (window_start > window_end) throw MetricError("summary window is inverted");
  std::vector<std::string> order;
  std::map<std::string, std::vector<SummaryRow>> groups;
  for (const auto& run : runs) {
    if (run.rows.empty() || run.rows.front().step > window_start ||
        run.rows.back().step < window_end) {
      throw MetricError("run " + run.run_id + " does not cover steps " +
                        std::to_string(window_start) + "-" + std::to_string(window_end));
    }
    double exploration = 0.0;
    double structure = 0.0;
    std::size_t n_exploration = 0;
    std::size_t n_structure = 0;
    for (const auto& row : run.rows) {
      if (row.step < window_start || row.step > window_end) continue;
      exploration += row.new_colors;
      ++n_exploration;
      if (!std::isnan(row.kl_divergence)) {
        structure += row.kl_divergence;
        ++n_structure;
      }
    }
    SummaryRow s;
    s.condition = run.condition;
    s.run_id = run.run_id;
    s.mean_exploration = exploration / static_cast<double>(n_exploration);
    s.mean_structuredness = n_structure ? structure / static_cast<double>(n_structure)
                                        : std::numeric_limits<double>::quiet_NaN();
    if (!groups.contains(run.condition)) order.push_back(run.condition);
    groups[run.condition].push_back(std::move(s));
  }
  std::vector<SummaryRow> out;
  for (const auto& c : order) {
    for (auto& s : groups[c]) out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "condition,run_id,mean_exploration,mean_structuredness\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.condition << ',' << r.run_id << ',' << r.mean_exploration << ','
        << r.mean_structuredness << '\n';
  }
  out.precision(old_precision);
}

double mean_same_type_cluster_size(const World& world, double link_radius) {
  const auto& ps = world.particles;
  std::vector<std::size_t> parent(ps.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  SpatialGrid grid(world.side, std::max(link_radius, 1.0));
  grid.rebuild(ps, [&](std::size_t i) { return ps[i].active; });
  std::size_t actives = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!ps[i].active) continue;
    ++actives;
    grid.for_each_within(ps[i].pos, link_radius, [&](std::size_t j, double) {
      if (j <= i || !(ps[j].params == ps[i].params)) return;
      const auto ri = find(i);
      const auto rj = find(j);
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    });
  }
  if (actives == 0) return 0.0;
  std::size_t clusters = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i].active && find(i) == i) ++clusters;
  }
  return static_cast<double>(actives) / static_cast<double>(clusters);
}

}  // namespace swarmchem::metrics
