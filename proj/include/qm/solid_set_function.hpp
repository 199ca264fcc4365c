#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qm/grid.hpp"
#include "qm/measure.hpp"
#include "qm/random.hpp"
#include "qm/report.hpp"

namespace qm {

// Valuation on solid regions. valuate() may return nullopt for regions where
// the function is undefined; checkers report that as a valuation gap.
class SolidSetFunction {
 public:
  using Valuation = std::function<std::optional<double>(const Region&)>;

  SolidSetFunction() = default;
  SolidSetFunction(GridSpace space, Valuation valuation, std::string name);

  std::optional<double> valuate(const Region& solid) const { return valuation_(solid); }
  // Value on the whole space; throws on a gap.
  double total() const;

  const GridSpace& space() const { return space_; }
  const std::string& name() const { return name_; }

 private:
  GridSpace space_;
  Valuation valuation_;
  std::string name_;
};

// λ(A) = 1 iff the cell lies in A.
SolidSetFunction make_point_mass_seed(const GridSpace& space, std::size_t cell);

// λ(A) = floor(|A ∩ P| / 2) / n for 2n+1 distinct points P.
SolidSetFunction make_point_config(const GridSpace& space, const std::vector<std::size_t>& points);

// Marked-infinity mode. λ(A) = area(A) times the number of the two points
// lying in A, with area(A) = |A| · cell_area.
SolidSetFunction make_weighted_two_point(const GridSpace& space, std::size_t p1, std::size_t p2, double cell_area);

// Boundary layer of the space: admissible cells with an 8-neighbour outside.
CellSet boundary_cells(const GridSpace& space);

// λ(A) = 1 iff A contains the whole boundary layer B, or contains p and
// meets B.
SolidSetFunction make_aarnes_circle(const GridSpace& space, std::size_t p);

// Deficient measure: 1 iff the squares of D lie inside A.
TopoMeasure make_diffuse_dtm(const GridSpace& space, const CellSet& d);

// Topological measure agreeing with λ on solid regions. Other regions are
// reduced to solid ones: a region is the sum of its components; a connected
// non-solid region C is λ(X) minus the complement components (compact mode)
// or λ(C with holes filled) minus the holes (marked-infinity mode).
TopoMeasure extend(const SolidSetFunction& lambda);

// Samples solid configurations and tests superadditivity, regularity and
// partition additivity. Throws "valuation gap" when λ is undefined on a
// sampled solid region.
CheckReport check_ssf_axioms(const SolidSetFunction& lambda, std::size_t budget, std::uint64_t seed);

// TM1 preconditions: the realized sets are disjoint, their union is the union
// region read with union_role, and (marked-infinity mode) every compact-role
// set involved is precompact.
bool tm1_admissible(const GridSpace& space, const Region& a, const Region& b, Role union_role);

struct AdmissiblePair {
  Region a, b;
  Role union_role = Role::compact;
};

// Random pair passing tm1_admissible, drawn from several generators (separated
// blobs, open pieces carved out of compact sets, complements, ...). Returns
// nullopt when `tries` draws all fail.
std::optional<AdmissiblePair> sample_admissible_pair(const GridSpace& space, Rng& rng, bool compact_only,
                                                     int tries = 16);

// Sampled additivity on admissible disjoint pairs. Deficient measures are
// only tested on compact + compact pairs.
CheckReport check_tm1_sampled(const TopoMeasure& mu, std::size_t budget, std::uint64_t seed);

// Sampled superadditivity: μ(A) ≥ Σ μ(A_t) for disjoint pieces A_t ⊆ A.
CheckReport check_superadditivity(const TopoMeasure& mu, std::size_t budget, std::uint64_t seed);

// Sampled subadditivity μ(A ∪ B) ≤ μ(A) + μ(B) over same-role pairs.
// `probe_pairs` are tested before random samples. A passing report is
// evidence, not proof, that μ extends to a measure.
CheckReport check_measure_criteria(const TopoMeasure& mu, std::size_t budget, std::uint64_t seed,
                                   const std::vector<std::pair<Region, Region>>& probe_pairs = {});

}  // namespace qm
