#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmchem/rng.hpp"
#include "swarmchem/world.hpp"

namespace swarmchem::metrics {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  std::uint32_t packed() const { return (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | b; }
  static Rgb unpack(std::uint32_t v) {
    return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
            static_cast<std::uint8_t>(v)};
  }
  friend bool operator==(Rgb, Rgb) = default;
};

inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kPassiveColor{200, 200, 200};

class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int width, int height, std::uint64_t step = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);

  /// Row-major RGB bytes, top row first.
  const std::vector<std::uint8_t>& bytes() const { return rgb_; }
  std::vector<std::uint8_t>& bytes() { return rgb_; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::uint64_t step_ = 0;
  std::vector<std::uint8_t> rgb_;
};

/// Stable 24-bit colour for a kinetic type: a hash of the parameters rounded
/// to four decimals. Never equal to the background or passive colour.
Rgb type_color(const KineticParams& params);

inline constexpr int kDefaultRenderSize = 500;

/// One pixel per particle on a white background: passive particles grey,
/// active particles in their type colour drawn over them.
Bitmap render(const World& world, int width = kDefaultRenderSize,
              int height = kDefaultRenderSize);

/// Distinct packed colours in the bitmap other than background and passive grey, sorted.
std::vector<std::uint32_t> type_colors(const Bitmap& bitmap);

/// Element k = number of colours in snapshot k never seen in snapshots 0..k-1.
std::vector<int> exploration_series(std::span<const std::vector<std::uint32_t>> color_sets);
std::vector<int> exploration_series(std::span<const Bitmap> snapshots);

struct PixelCoord {
  int x = 0;
  int y = 0;
};

/// Coordinates of pixels that hold a type colour.
std::vector<PixelCoord> particle_pixels(const Bitmap& bitmap);

inline constexpr std::size_t kDistanceBins = 100;
inline constexpr std::size_t kPairSamples = 100'000;
inline constexpr std::size_t kReferencePairs = 10'000'000;
inline constexpr double kProbabilityFloor = 1e-12;

/// Uniform bins over [0, max_distance]; distances at the top edge land in the last bin.
struct DistanceHistogram {
  double max_distance = 0.0;
  std::vector<double> probabilities;

  std::size_t bin_of(double distance) const;
};

/// `samples` random pairs of distinct list entries, drawn with replacement.
DistanceHistogram sample_distance_histogram(std::span<const PixelCoord> coords, double max_distance,
                                            std::size_t samples, RandomSource& rng);

/// Distances between independent uniform pixels of a width x height image.
DistanceHistogram uniform_reference_histogram(int width, int height, std::size_t pairs,
                                              std::uint64_t seed);

/// Cached uniform_reference_histogram with kReferencePairs pairs. Thread-safe.
const DistanceHistogram& reference_histogram(int width, int height);

/// sum over p_i > 0 of p_i log(p_i / max(q_i, floor)).
double kl_divergence(const DistanceHistogram& p, const DistanceHistogram& q,
                     double floor = kProbabilityFloor);

/// KL divergence of the sampled pixel-pair distance distribution from the
/// uniform reference for the same image size. Throws MetricError with fewer
/// than two particle pixels.
double structuredness(const Bitmap& bitmap, RandomSource& rng);
double structuredness(const Bitmap& bitmap, std::uint64_t seed);

struct MetricRow {
  std::uint64_t step = 0;
  int new_colors = 0;
  /// NaN when the snapshot holds fewer than two particle pixels.
  double kl_divergence = 0.0;
};

/// Exploration and structuredness for snapshots ordered by step. The
/// structuredness sampler for snapshot k is seeded from (seed, step).
std::vector<MetricRow> metric_series(std::span<const Bitmap> snapshots, std::uint64_t seed = 0);

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows);
std::vector<MetricRow> read_metric_csv(std::istream& in);

struct RunSeries {
  std::string condition;
  std::string run_id;
  std::vector<MetricRow> rows;
};

struct SummaryRow {
  std::string condition;
  std::string run_id;
  double mean_exploration = 0.0;
  double mean_structuredness = 0.0;
};

inline constexpr std::uint64_t kSummaryWindowStart = 10'000;
inline constexpr std::uint64_t kSummaryWindowEnd = 30'000;

/// Per run, the means of new_colors and kl_divergence over rows with
/// window_start <= step <= window_end (NaN structuredness rows skipped).
/// Rows are grouped by condition, in first-appearance order. Throws
/// MetricError when a run's rows do not reach both ends of the window.
std::vector<SummaryRow> condition_summary(std::span<const RunSeries> runs,
                                          std::uint64_t window_start = kSummaryWindowStart,
                                          std::uint64_t window_end = kSummaryWindowEnd);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

/// Mean size of same-type clusters: connected components of active particles
/// with identical kinetic parameters, linked below `link_radius`. 0 with no
/// active particles.
double mean_same_type_cluster_size(const World& world, double link_radius = 30.0);

}  // namespace swarmchem::metrics
