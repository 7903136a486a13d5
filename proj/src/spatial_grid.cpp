#include "swarmchem/spatial_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarmchem {

SpatialGrid::SpatialGrid(double side, double cell_size) : side_(side), cell_(cell_size) {
  if (!(side > 0.0) || !(cell_size > 0.0)) throw std::invalid_argument("grid needs positive sizes");
  dim_ = std::max(1, static_cast<int>(std::ceil(side_ / cell_)));
  cell_start_.assign(static_cast<std::size_t>(dim_) * dim_ + 1, 0);
}

void SpatialGrid::build_from_cells(std::span<const Particle> particles) {
  const std::size_t n_cells = static_cast<std::size_t>(dim_) * dim_;
  std::fill(cell_start_.begin(), cell_start_.end(), 0);
  for (const auto c : scratch_cells_) ++cell_start_[c + 1];
  for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] += cell_start_[c];

  ids_.resize(scratch_ids_.size());
  pos_.resize(scratch_ids_.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  // scratch_ids_ is ascending, so each bucket ends up sorted by id.
  for (std::size_t k = 0; k < scratch_ids_.size(); ++k) {
    const auto slot = fill[scratch_cells_[k]]++;
    ids_[slot] = scratch_ids_[k];
    pos_[slot] = particles[scratch_ids_[k]].pos;
  }
}

std::vector<std::size_t> neighbors(const World& world, const SpatialGrid& grid, std::size_t i,
                                   double radius) {
  std::vector<std::size_t> out;
  grid.for_each_within(world.particles[i].pos, radius, [&](std::size_t j, double) {
    if (j != i) out.push_back(j);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> neighbors(const World& world, std::size_t i, double radius) {
  SpatialGrid grid(world.side);
  grid.rebuild_all(world.particles);
  return neighbors(world, grid, i, radius);
}

std::vector<std::size_t> neighbors_brute_force(const World& world, std::size_t i, double radius) {
  std::vector<std::size_t> out;
  const Vec2 c = world.particles[i].pos;
  const double r2 = radius * radius;
  for (std::size_t j = 0; j < world.particles.size(); ++j) {
    if (j == i) continue;
    const double dx = world.particles[j].pos.x - c.x;
    const double dy = world.particles[j].pos.y - c.y;
    if (dx * dx + dy * dy < r2) out.push_back(j);
  }
  return out;
}

}  // namespace swarmchem
