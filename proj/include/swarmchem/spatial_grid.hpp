#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "swarmchem/world.hpp"

namespace swarmchem {

/// Uniform bucket grid over [0, side)^2 with no wrap-around adjacency.
///
/// Members are stored sorted by (cell, id), so every query visits candidates
/// in the same order regardless of how the grid was filled.
class SpatialGrid {
 public:
  explicit SpatialGrid(double side, double cell_size = kMaxPerceptionRadius);

  /// Indexes particles for which `include(i)` holds.
  template <typename Pred>
  void rebuild(std::span<const Particle> particles, Pred include);
  void rebuild_all(std::span<const Particle> particles) {
    rebuild(particles, [](std::size_t) { return true; });
  }

  /// Calls fn(id, squared_distance) for every indexed member strictly
  /// closer than `radius` to `center`, the query point itself included.
  template <typename Fn>
  void for_each_within(Vec2 center, double radius, Fn&& fn) const;

  std::size_t size() const { return ids_.size(); }
  double cell_size() const { return cell_; }

 private:
  int cell_coord(double v) const;
  void build_from_cells(std::span<const Particle> particles);

  double side_;
  double cell_;
  int dim_;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> ids_;
  std::vector<Vec2> pos_;
  std::vector<std::uint32_t> scratch_cells_;
  std::vector<std::uint32_t> scratch_ids_;
};

/// Ids j != i with non-wrapping distance to particle i below `radius`,
/// over all particles, sorted ascending.
std::vector<std::size_t> neighbors(const World& world, const SpatialGrid& grid, std::size_t i,
                                   double radius);
/// Convenience overload that indexes the whole population first.
std::vector<std::size_t> neighbors(const World& world, std::size_t i, double radius);

/// O(N^2) reference for neighbors().
std::vector<std::size_t> neighbors_brute_force(const World& world, std::size_t i, double radius);

// ---------------------------------------------------------------------------

inline int SpatialGrid::cell_coord(double v) const {
  int c = static_cast<int>(v / cell_);
  if (c < 0) c = 0;
  if (c >= dim_) c = dim_ - 1;
  return c;
}

template <typename Pred>
void SpatialGrid::rebuild(std::span<const Particle> particles, Pred include) {
  scratch_ids_.clear();
  scratch_cells_.clear();
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (!include(i)) continue;
    const Vec2 p = particles[i].pos;
    scratch_ids_.push_back(static_cast<std::uint32_t>(i));
    scratch_cells_.push_back(
        static_cast<std::uint32_t>(cell_coord(p.y) * dim_ + cell_coord(p.x)));
  }
  build_from_cells(particles);
}

template <typename Fn>
void SpatialGrid::for_each_within(Vec2 center, double radius, Fn&& fn) const {
  if (ids_.empty() || !(radius > 0.0)) return;
  const double r2 = radius * radius;
  const int span = static_cast<int>(std::ceil(radius / cell_));
  const int cx = cell_coord(center.x);
  const int cy = cell_coord(center.y);
  const int x0 = cx - span < 0 ? 0 : cx - span;
  const int x1 = cx + span >= dim_ ? dim_ - 1 : cx + span;
  const int y0 = cy - span < 0 ? 0 : cy - span;
  const int y1 = cy + span >= dim_ ? dim_ - 1 : cy + span;
  for (int y = y0; y <= y1; ++y) {
    const std::uint32_t begin = cell_start_[static_cast<std::size_t>(y * dim_ + x0)];
    const std::uint32_t end = cell_start_[static_cast<std::size_t>(y * dim_ + x1 + 1)];
    for (std::uint32_t k = begin; k < end; ++k) {
      const double dx = pos_[k].x - center.x;
      const double dy = pos_[k].y - center.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < r2) fn(static_cast<std::size_t>(ids_[k]), d2);
    }
  }
}

}  // namespace swarmchem
