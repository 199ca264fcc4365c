#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qm/grid.hpp"
#include "qm/measure.hpp"
#include "qm/report.hpp"

namespace qm {

// Region-to-region map from `source` to `target`. Results are cached per
// input region; the cache is shared by copies and never overwrites a value.
class ImageTransform {
 public:
  using Map = std::function<Region(const Region&)>;

  ImageTransform() = default;
  ImageTransform(GridSpace source, GridSpace target, Map map, std::string descriptor,
                 bool preserves_measures = false);

  // Checks that the input is admissible in the source and that the image is
  // an admissible target region of the same role.
  Region operator()(const Region& a) const;

  const GridSpace& source() const;
  const GridSpace& target() const;
  const std::string& descriptor() const;
  // True when q* sends plain measures to plain measures (preimage maps).
  bool preserves_measures() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// Maps admissible target cells to admissible source cells.
using CellMap = std::vector<std::size_t>;

// q(A) = u⁻¹(A). In marked-infinity mode u must be proper: target frame
// cells have to land on source frame cells.
ImageTransform from_proper_map(const GridSpace& source, const GridSpace& target, const CellMap& u,
                               std::string descriptor = "inverse_map");

CellMap identity_map(const GridSpace& space);
CellMap constant_map(const GridSpace& target, std::size_t source_cell);

// The 8 symmetries of a square grid: k = 0..3 rotations by k·90°, k = 4..7
// the same followed by a mirror in the vertical axis. Returns the cell map
// c ↦ g(c).
CellMap grid_isometry(const GridSpace& space, int k);

// q(A) = target if μs(A) = 1, ∅ if μs(A) = 0. Throws if μs is not simple
// (checked on the whole space and on sampled regions).
ImageTransform constant_from_simple(const TopoMeasure& simple, const GridSpace& target);

// Extends a map given on solid regions to all regions: components map to
// disjoint images; a connected non-solid region maps to q(X) minus the images
// of its complement components (compact mode) or to q(hull) minus the images
// of its holes. Overlaps or images outside the container raise
// "extension inconsistency" with the offending region.
ImageTransform extend_solid_q(const GridSpace& source, const GridSpace& target, ImageTransform::Map q0,
                              std::string descriptor);

// On solid A: ∅, A or the whole space when A holds 0, 1 or 2 of {x, z}.
ImageTransform two_point_hull(const GridSpace& space, std::size_t x, std::size_t z);

// (p∘q)(A) = p(q(A)); q's target must be p's source.
ImageTransform compose(const ImageTransform& p, const ImageTransform& q);

// Fault injection for checker tests: q(A) with one fixed target cell removed.
ImageTransform with_cell_removed(const ImageTransform& q, std::size_t cell);

// q*ν = ν∘q, a set function on the source.
TopoMeasure adjoint(const ImageTransform& q, const TopoMeasure& nu);
double adjoint_eval(const ImageTransform& q, const TopoMeasure& nu, const Region& a);

// θ(f)(y) = ∫ f d(q*δ_y).
double theta_eval(const ImageTransform& q, const GridFunction& f, std::size_t y);
GridFunction theta(const ImageTransform& q, const GridFunction& f);

// Samples role preservation, q(∅) = ∅, monotonicity, disjoint additivity and
// regularity along one-cell chains. The chain limits are compared with q only
// on cell sets whose component structure is the same under both adjacencies.
CheckReport check_it_axioms(const ImageTransform& q, std::size_t budget, std::uint64_t seed);

}  // namespace qm
