#include "qm/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "qm/error.hpp"

namespace qm {

Region random_connected(const GridSpace& space, Role role, Rng& rng, std::size_t size, std::size_t start) {
  const auto cells = space.interior().indices();
  require(!cells.empty(), "grid has no admissible cells");
  Region r = space.empty(role);
  std::size_t seed = start;
  if (seed >= space.cell_count() || !space.admissible(seed)) seed = cells[rng.below(cells.size())];
  r.cells.set(seed);
  std::vector<std::size_t> members{seed};
  const Adjacency adj = adjacency_of(role);
  size = std::max<std::size_t>(1, std::min(size, cells.size()));
  std::size_t stalls = 0;
  while (members.size() < size && stalls < 64) {
    const std::size_t from = members[rng.below(members.size())];
    const auto& nbrs = space.neighbors(from, adj);
    if (nbrs.empty()) {
      ++stalls;
      continue;
    }
    const std::size_t to = nbrs[rng.below(nbrs.size())];
    if (r.cells.test(to)) {
      ++stalls;
      continue;
    }
    stalls = 0;
    r.cells.set(to);
    members.push_back(to);
  }
  return r;
}

Region fill_to_solid(const GridSpace& space, const Region& connected) {
  Region r = connected;
  auto parts = complement_components(space, connected);
  if (space.mode() == Mode::compact) {
    if (parts.empty()) return r;
    std::size_t keep = 0;
    for (std::size_t k = 1; k < parts.size(); ++k)
      if (parts[k].size() > parts[keep].size()) keep = k;
    for (std::size_t k = 0; k < parts.size(); ++k)
      if (k != keep) r.cells |= parts[k].cells;
  } else {
    for (auto& h : parts)
      if (!h.cells.intersects(space.frame())) r.cells |= h.cells;
  }
  return r;
}

Region random_solid(const GridSpace& space, Role role, Rng& rng, std::size_t size) {
  return fill_to_solid(space, random_connected(space, role, rng, size));
}

Region random_blobs(const GridSpace& space, Role role, Rng& rng, int blobs, std::size_t size) {
  Region r = space.empty(role);
  for (int b = 0; b < blobs; ++b) r.cells |= random_connected(space, role, rng, size).cells;
  return r;
}

Region random_cells(const GridSpace& space, Role role, Rng& rng, double density) {
  Region r = space.empty(role);
  for (auto i : space.interior().indices())
    if (rng.coin(density)) r.cells.set(i);
  return r;
}

CellSet random_half_plane(const GridSpace& space, Rng& rng) {
  const double angle = rng.uniform(0, 2 * M_PI);
  const double px = rng.uniform(0, space.width() - 1), py = rng.uniform(0, space.height() - 1);
  const double nx = std::cos(angle), ny = std::sin(angle);
  CellSet s(space.cell_count());
  for (auto i : space.interior().indices())
    if ((space.x_of(i) - px) * nx + (space.y_of(i) - py) * ny > 0) s.set(i);
  return s;
}

std::size_t random_size(const GridSpace& space, Rng& rng) {
  const std::size_t n = space.interior_count();
  // Mix small and large blobs; small ones dominate on big grids.
  if (rng.coin(0.5)) return 1 + rng.below(std::max<std::size_t>(1, n / 2));
  const std::size_t cap = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(static_cast<double>(n)) * 3));
  return 1 + rng.below(std::min(n, cap));
}

}  // namespace qm

namespace qm {

Region random_connected_within(const GridSpace& space, const CellSet& mask, Role role, Rng& rng, std::size_t size) {
  Region r = space.empty(role);
  const CellSet usable = mask & space.interior();
  const auto cells = usable.indices();
  if (cells.empty()) return r;
  const std::size_t seed = cells[rng.below(cells.size())];
  r.cells.set(seed);
  std::vector<std::size_t> members{seed};
  const Adjacency adj = adjacency_of(role);
  size = std::max<std::size_t>(1, std::min(size, cells.size()));
  std::size_t stalls = 0;
  while (members.size() < size && stalls < 64) {
    const auto& nbrs = space.neighbors(members[rng.below(members.size())], adj);
    if (nbrs.empty()) {
      ++stalls;
      continue;
    }
    const std::size_t to = nbrs[rng.below(nbrs.size())];
    if (!usable.test(to) || r.cells.test(to)) {
      ++stalls;
      continue;
    }
    stalls = 0;
    r.cells.set(to);
    members.push_back(to);
  }
  return r;
}

CellSet closed_interior(const GridSpace& space, const CellSet& cells) {
  CellSet out(cells.size());
  for (auto c : cells.indices()) {
    bool inside = true;
    for (auto n : space.neighbors(c, Adjacency::four)) inside &= cells.test(n);
    for (auto v : space.cell_vertices(c))
      for (auto a : space.vertex_cells()[v]) inside &= cells.test(a);
    if (inside) out.set(c);
  }
  return out;
}

}  // namespace qm
