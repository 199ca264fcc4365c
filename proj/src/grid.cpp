#include "qm/grid.hpp"

#include <algorithm>
#include <sstream>

#include "qm/error.hpp"

namespace qm {

GridSpace::GridSpace(int width, int height, Mode mode, double cell_size, Point origin) {
  require(width >= 3 && height >= 3, "grid must be at least 3x3");
  require(cell_size > 0, "cell size must be positive");
  impl_ = std::make_shared<Impl>();
  impl_->width = width;
  impl_->height = height;
  impl_->mode = mode;
  impl_->cell_size = cell_size;
  impl_->origin = origin;
  impl_->interior = CellSet(cell_count());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const bool ring = x == 0 || y == 0 || x == width - 1 || y == height - 1;
      if (mode == Mode::compact || !ring) impl_->interior.set(index(x, y));
    }
  build();
}

GridSpace GridSpace::with_mask(int width, int height, const CellSet& mask, double cell_size, Point origin) {
  GridSpace g(width, height, Mode::compact, cell_size, origin);
  require(mask.size() == g.cell_count(), "mask size does not match grid");
  require(mask.any(), "mask is empty");
  for (int y = 0; y + 1 < height; ++y)
    for (int x = 0; x + 1 < width; ++x) {
      const bool a = mask.test(g.index(x, y)), b = mask.test(g.index(x + 1, y));
      const bool c = mask.test(g.index(x, y + 1)), d = mask.test(g.index(x + 1, y + 1));
      require(!((a && d && !b && !c) || (b && c && !a && !d)), "mask has a diagonal pinch");
    }
  auto impl = std::make_shared<Impl>(*g.impl_);
  impl->interior = mask;
  impl->masked = true;
  g.impl_ = impl;
  g.build();
  require(is_connected(g, mask, Adjacency::four), "mask is not connected");
  return g;
}

GridSpace GridSpace::disk(int diameter, double radius) {
  GridSpace g(diameter, diameter, Mode::compact);
  CellSet mask(g.cell_count());
  const double c = (diameter - 1) / 2.0;
  for (int y = 0; y < diameter; ++y)
    for (int x = 0; x < diameter; ++x)
      if ((x - c) * (x - c) + (y - c) * (y - c) <= radius * radius) mask.set(g.index(x, y));
  return with_mask(diameter, diameter, mask);
}

void GridSpace::build() {
  Impl& m = *impl_;
  const int w = m.width, h = m.height;
  m.interior_count = m.interior.count();
  m.frame = CellSet(cell_count());
  m.nbr4.assign(cell_count(), {});
  m.nbr8.assign(cell_count(), {});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = index(x, y);
      if (!m.interior.test(i)) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (!in_grid(nx, ny)) continue;
          const std::size_t j = index(nx, ny);
          if (!m.interior.test(j)) {
            if (m.mode == Mode::marked_infinity) m.frame.set(i);
            continue;
          }
          m.nbr8[i].push_back(static_cast<std::uint32_t>(j));
          if (dx == 0 || dy == 0) m.nbr4[i].push_back(static_cast<std::uint32_t>(j));
        }
    }
  m.vertex_cells.clear();
  m.cell_vertices.assign(cell_count(), {});
  for (int vy = 0; vy <= h; ++vy)
    for (int vx = 0; vx <= w; ++vx) {
      std::vector<std::uint32_t> around;
      bool all_admissible = true;
      for (int dy = -1; dy <= 0; ++dy)
        for (int dx = -1; dx <= 0; ++dx) {
          const int cx = vx + dx, cy = vy + dy;
          if (in_grid(cx, cy) && m.interior.test(index(cx, cy)))
            around.push_back(static_cast<std::uint32_t>(index(cx, cy)));
          else
            all_admissible = false;
        }
      const bool in_space = m.mode == Mode::compact ? !around.empty() : all_admissible;
      if (!in_space) continue;
      const auto id = static_cast<std::uint32_t>(m.vertex_cells.size());
      for (auto c : around) m.cell_vertices[c].push_back(id);
      m.vertex_cells.push_back(std::move(around));
    }
}

Point GridSpace::center(std::size_t i) const {
  return {impl_->origin.x + x_of(i) * impl_->cell_size, impl_->origin.y + y_of(i) * impl_->cell_size};
}

Region GridSpace::region(const std::vector<std::size_t>& cells, Role role) const {
  Region r{CellSet(cell_count()), role};
  for (auto c : cells) {
    require(c < cell_count() && admissible(c), "cell outside the admissible grid");
    r.cells.set(c);
  }
  return r;
}

Region GridSpace::rect(int x0, int y0, int x1, int y1, Role role) const {
  Region r{CellSet(cell_count()), role};
  for (int y = std::max(0, y0); y <= std::min(height() - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(width() - 1, x1); ++x)
      if (admissible(index(x, y))) r.cells.set(index(x, y));
  return r;
}

Region GridSpace::ball(Point c, double radius, Role role) const {
  Region r{CellSet(cell_count()), role};
  for (auto i : interior().indices())
    if (distance(center(i), c) <= radius) r.cells.set(i);
  return r;
}

bool GridSpace::admissible(const Region& r) const {
  return r.cells.size() == cell_count() && r.cells.subset_of(impl_->interior);
}

void GridSpace::require_admissible(const Region& r) const {
  require(r.cells.size() == cell_count(), "region belongs to a different grid");
  require(r.cells.subset_of(impl_->interior),
          mode() == Mode::marked_infinity ? "region meets the infinity ring" : "region leaves the mask");
}

std::string GridSpace::describe() const {
  std::ostringstream out;
  out << width() << "x" << height() << (mode() == Mode::compact ? " compact" : " marked-infinity")
      << (masked() ? " masked" : "");
  return out.str();
}

bool GridSpace::operator==(const GridSpace& o) const {
  if (impl_ == o.impl_) return true;
  if (!impl_ || !o.impl_) return false;
  return width() == o.width() && height() == o.height() && mode() == o.mode() && cell_size() == o.cell_size() &&
         origin() == o.origin() && interior() == o.interior();
}

std::vector<CellSet> components(const GridSpace& space, const CellSet& cells, Adjacency adj) {
  std::vector<CellSet> out;
  CellSet left = cells;
  std::vector<std::uint32_t> stack;
  for (std::size_t seed = left.first(); seed < left.size(); seed = left.first()) {
    CellSet comp(cells.size());
    left.reset(seed);
    comp.set(seed);
    stack.assign(1, static_cast<std::uint32_t>(seed));
    while (!stack.empty()) {
      const auto c = stack.back();
      stack.pop_back();
      for (auto n : space.neighbors(c, adj))
        if (left.test(n)) {
          left.reset(n);
          comp.set(n);
          stack.push_back(n);
        }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

std::vector<Region> components(const GridSpace& space, const Region& r, ComponentRule rule) {
  space.require_admissible(r);
  const Adjacency adj = adjacency_of(rule == ComponentRule::region ? r.role : flip(r.role));
  std::vector<Region> out;
  for (auto& c : components(space, r.cells, adj)) out.push_back(Region{std::move(c), r.role});
  return out;
}

bool is_connected(const GridSpace& space, const CellSet& cells, Adjacency adj) {
  const std::size_t seed = cells.first();
  if (seed >= cells.size()) return true;
  CellSet seen(cells.size());
  seen.set(seed);
  std::size_t reached = 1;
  std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(seed)};
  while (!stack.empty()) {
    const auto c = stack.back();
    stack.pop_back();
    for (auto n : space.neighbors(c, adj))
      if (cells.test(n) && !seen.test(n)) {
        seen.set(n);
        ++reached;
        stack.push_back(n);
      }
  }
  return reached == cells.count();
}

Region complement(const GridSpace& space, const Region& r) {
  space.require_admissible(r);
  return Region{space.interior() - r.cells, flip(r.role)};
}

bool is_solid(const GridSpace& space, const Region& r) {
  space.require_admissible(r);
  require(r.cells.any(), "empty set has no solidness");
  if (!is_connected(space, r.cells, adjacency_of(r.role))) return false;
  const CellSet rest = space.interior() - r.cells;
  const Adjacency dual = adjacency_of(flip(r.role));
  if (space.mode() == Mode::compact) return is_connected(space, rest, dual);
  for (const auto& comp : components(space, rest, dual))
    if (!comp.intersects(space.frame())) return false;
  return true;
}

bool is_precompact(const GridSpace& space, const Region& r) {
  require(space.mode() == Mode::marked_infinity, "all sets precompact in compact mode");
  space.require_admissible(r);
  return !r.cells.intersects(space.frame());
}

std::vector<Region> complement_components(const GridSpace& space, const Region& r) {
  return components(space, complement(space, r), ComponentRule::region);
}

std::vector<Region> holes(const GridSpace& space, const Region& r) {
  require(space.mode() == Mode::marked_infinity, "holes are defined in marked-infinity mode");
  std::vector<Region> out;
  for (auto& c : complement_components(space, r))
    if (!c.cells.intersects(space.frame())) out.push_back(std::move(c));
  return out;
}

CellSet dilate(const GridSpace& space, const CellSet& cells, Adjacency adj) {
  CellSet out = cells;
  for (auto c : cells.indices())
    for (auto n : space.neighbors(c, adj)) out.set(n);
  return out;
}

namespace {

// Every point of the squares of `cells` lies in the interior (relative to the
// space) of the squares of `cover`.
bool squares_inside_open(const GridSpace& space, const CellSet& cells, const CellSet& cover) {
  if (!cells.subset_of(cover)) return false;
  for (auto c : cells.indices()) {
    for (auto n : space.neighbors(c, Adjacency::four))
      if (!cover.test(n)) return false;
    for (auto v : space.cell_vertices(c))
      for (auto a : space.vertex_cells()[v])
        if (!cover.test(a)) return false;
  }
  return true;
}

bool eight_touching(const GridSpace& space, const CellSet& a, const CellSet& b) {
  for (auto c : a.indices())
    for (auto n : space.neighbors(c, Adjacency::eight))
      if (b.test(n)) return true;
  return false;
}

}  // namespace

bool realized_subset(const GridSpace& space, const Region& a, const Region& b) {
  if (a.role == Role::compact && b.role == Role::open) return squares_inside_open(space, a.cells, b.cells);
  return a.cells.subset_of(b.cells);
}

bool disjoint_union_is(const GridSpace& space, const Region& a, const Region& b, Role union_role) {
  if (a.cells.intersects(b.cells)) return false;
  if (a.empty() || b.empty()) {
    const Region& r = a.empty() ? b : a;
    return r.role == union_role || r.empty() || r.cells == space.interior();
  }
  if (a.role == b.role) {
    if (union_role != a.role) return false;
    if (a.role == Role::compact) return !eight_touching(space, a.cells, b.cells);
    for (auto c : a.cells.indices())
      for (auto n : space.neighbors(c, Adjacency::four))
        if (b.cells.test(n)) return false;
    // A lattice vertex surrounded only by cells of A and B would be interior
    // to the union without belonging to either open set.
    const CellSet both = a.cells | b.cells;
    for (const auto& around : space.vertex_cells()) {
      bool in_a = false, in_b = false, covered = true;
      for (auto c : around) {
        in_a |= a.cells.test(c);
        in_b |= b.cells.test(c);
        covered &= both.test(c);
      }
      if (covered && in_a && in_b) return false;
    }
    return true;
  }
  const Region& k = a.role == Role::compact ? a : b;
  const Region& u = a.role == Role::compact ? b : a;
  const CellSet both = k.cells | u.cells;
  if (union_role == Role::open) return squares_inside_open(space, k.cells, both);
  // Compact union: the boundary of the open squares must be covered by K.
  for (auto c : u.cells.indices()) {
    for (auto n : space.neighbors(c, Adjacency::four))
      if (!both.test(n)) return false;
    for (auto v : space.cell_vertices(c)) {
      bool all_open = true, meets_compact = false;
      for (auto x : space.vertex_cells()[v]) {
        all_open &= u.cells.test(x);
        meets_compact |= k.cells.test(x);
      }
      if (!all_open && !meets_compact) return false;
    }
  }
  return true;
}

double sup_norm(const GridSpace& space, const GridFunction& f) {
  double m = 0;
  for (auto i : space.interior().indices()) m = std::max(m, std::abs(f[i]));
  return m;
}

GridFunction radial_function(const GridSpace& space, Point center, double radius, double height) {
  require(radius > 0, "radial function needs a positive radius");
  GridFunction f(space.cell_count());
  for (auto i : space.interior().indices())
    f[i] = std::max(0.0, height * (1.0 - distance(space.center(i), center) / radius));
  return f;
}

GridFunction coordinate_x_function(const GridSpace& space) {
  GridFunction f(space.cell_count());
  for (auto i : space.interior().indices()) f[i] = space.center(i).x;
  return f;
}

GridFunction indicator_function(const GridSpace& space, const CellSet& cells, double value) {
  GridFunction f(space.cell_count());
  for (auto i : (cells & space.interior()).indices()) f[i] = value;
  return f;
}

bool vanishes_near_ring(const GridSpace& space, const GridFunction& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if ((!space.admissible(i) || space.frame().test(i)) && f[i] != 0) return false;
  return true;
}

}  // namespace qm
