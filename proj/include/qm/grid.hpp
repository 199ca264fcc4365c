#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qm/cellset.hpp"

namespace qm {

enum class Mode { compact, marked_infinity };

// Compact-role regions stand for unions of closed cell squares, open-role
// regions for the interior of such a union. The role fixes the adjacency used
// for connectivity: closed squares touching at a corner are connected, open
// ones are not.
enum class Role { compact, open };

enum class Adjacency { four, eight };

inline Role flip(Role r) { return r == Role::compact ? Role::open : Role::compact; }

inline Adjacency adjacency_of(Role r) { return r == Role::compact ? Adjacency::eight : Adjacency::four; }

inline const char* role_name(Role r) { return r == Role::compact ? "compact" : "open"; }

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct Region {
  CellSet cells;
  Role role = Role::compact;

  bool empty() const { return cells.none(); }
  std::size_t size() const { return cells.count(); }
  bool operator==(const Region& o) const { return role == o.role && cells == o.cells; }
  bool operator!=(const Region& o) const { return !(*this == o); }
};

struct RegionHash {
  std::size_t operator()(const Region& r) const { return r.cells.hash() * 2 + (r.role == Role::open); }
};

// A rectangular grid of square cells. In compact mode the space is the union
// of the closed squares of the admissible cells (all cells, or a mask). In
// marked-infinity mode the outer ring of cells stands in for the point at
// infinity: the space is the open interior of the remaining cells.
class GridSpace {
 public:
  GridSpace() = default;
  GridSpace(int width, int height, Mode mode, double cell_size = 1.0, Point origin = {});

  // Compact space made of the cells in mask. The mask must be connected and
  // free of diagonal pinches (2x2 blocks holding exactly a diagonal pair).
  static GridSpace with_mask(int width, int height, const CellSet& mask, double cell_size = 1.0,
                             Point origin = {});

  // Compact digital disk: cells whose centers lie within radius (in cells) of
  // the grid center.
  static GridSpace disk(int diameter, double radius);

  int width() const { return impl_->width; }
  int height() const { return impl_->height; }
  Mode mode() const { return impl_->mode; }
  double cell_size() const { return impl_->cell_size; }
  Point origin() const { return impl_->origin; }
  bool masked() const { return impl_->masked; }

  std::size_t cell_count() const { return static_cast<std::size_t>(impl_->width) * impl_->height; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * impl_->width + x; }
  int x_of(std::size_t i) const { return static_cast<int>(i % impl_->width); }
  int y_of(std::size_t i) const { return static_cast<int>(i / impl_->width); }
  bool in_grid(int x, int y) const { return x >= 0 && y >= 0 && x < impl_->width && y < impl_->height; }

  // Cells allowed in regions: everything off the ring / inside the mask.
  const CellSet& interior() const { return impl_->interior; }
  bool admissible(std::size_t i) const { return impl_->interior.test(i); }
  bool admissible(int x, int y) const { return in_grid(x, y) && admissible(index(x, y)); }
  std::size_t interior_count() const { return impl_->interior_count; }

  // Marked-infinity mode: admissible cells 8-adjacent to the ring. Empty in
  // compact mode.
  const CellSet& frame() const { return impl_->frame; }

  Point center(std::size_t i) const;
  double cell_distance(std::size_t a, std::size_t b) const { return distance(center(a), center(b)); }

  // Admissible neighbours of an admissible cell.
  const std::vector<std::uint32_t>& neighbors(std::size_t i, Adjacency adj) const {
    return adj == Adjacency::four ? impl_->nbr4[i] : impl_->nbr8[i];
  }

  // Lattice vertices that belong to the space, each with the admissible cells
  // around it.
  const std::vector<std::vector<std::uint32_t>>& vertex_cells() const { return impl_->vertex_cells; }
  // For each cell, the indices into vertex_cells() of its corners that lie in
  // the space.
  const std::vector<std::uint32_t>& cell_vertices(std::size_t i) const { return impl_->cell_vertices[i]; }

  Region full(Role role) const { return Region{impl_->interior, role}; }
  Region empty(Role role) const { return Region{CellSet(cell_count()), role}; }
  Region region(const std::vector<std::size_t>& cells, Role role) const;
  Region rect(int x0, int y0, int x1, int y1, Role role) const;  // inclusive corners
  // Cells whose centers lie within radius (coordinate units) of c.
  Region ball(Point c, double radius, Role role) const;

  bool admissible(const Region& r) const;
  void require_admissible(const Region& r) const;

  std::string describe() const;

  bool operator==(const GridSpace& o) const;
  bool operator!=(const GridSpace& o) const { return !(*this == o); }

 private:
  struct Impl {
    int width = 0, height = 0;
    Mode mode = Mode::compact;
    double cell_size = 1.0;
    Point origin;
    bool masked = false;
    CellSet interior, frame;
    std::size_t interior_count = 0;
    std::vector<std::vector<std::uint32_t>> nbr4, nbr8;
    std::vector<std::vector<std::uint32_t>> vertex_cells;
    std::vector<std::vector<std::uint32_t>> cell_vertices;
  };
  void build();
  std::shared_ptr<Impl> impl_;
};

// Which adjacency to use when splitting a region: the one of its own role,
// or the one its complement would use.
enum class ComponentRule { region, complement };

std::vector<CellSet> components(const GridSpace& space, const CellSet& cells, Adjacency adj);
std::vector<Region> components(const GridSpace& space, const Region& r, ComponentRule rule = ComponentRule::region);
bool is_connected(const GridSpace& space, const CellSet& cells, Adjacency adj);

Region complement(const GridSpace& space, const Region& r);

bool is_solid(const GridSpace& space, const Region& r);
bool is_precompact(const GridSpace& space, const Region& r);

// Components of the complement, each carrying the flipped role.
std::vector<Region> complement_components(const GridSpace& space, const Region& r);

// Marked-infinity mode: complement components that do not reach the ring.
std::vector<Region> holes(const GridSpace& space, const Region& r);

CellSet dilate(const GridSpace& space, const CellSet& cells, Adjacency adj);

// Geometric relations between the sets that regions stand for.

// A ⊆ B as point sets.
bool realized_subset(const GridSpace& space, const Region& a, const Region& b);

// A and B are disjoint as point sets and their union is the region
// (A.cells ∪ B.cells) read with union_role.
bool disjoint_union_is(const GridSpace& space, const Region& a, const Region& b, Role union_role);

// Real-valued function on grid cells.
struct GridFunction {
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(std::size_t n, double v = 0) : values(n, v) {}

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// Largest |f| over admissible cells.
double sup_norm(const GridSpace& space, const GridFunction& f);

// max(0, height * (1 - d(c, center)/radius)), zero off the admissible cells.
GridFunction radial_function(const GridSpace& space, Point center, double radius, double height = 1.0);
GridFunction coordinate_x_function(const GridSpace& space);
GridFunction indicator_function(const GridSpace& space, const CellSet& cells, double value = 1.0);

// True when f vanishes on the frame and off the admissible cells.
bool vanishes_near_ring(const GridSpace& space, const GridFunction& f);

}  // namespace qm
