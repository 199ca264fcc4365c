#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qm/grid.hpp"
#include "qm/measure.hpp"
#include "qm/transport.hpp"

namespace qm {

// Weighted point cloud in the plane.
struct DiscreteMeasure {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double total() const;
  void add(Point p, double w);
  // Drops nonpositive weights and merges points closer than tol (in both
  // coordinates), keeping the first occurrence's position. Output is sorted
  // by (x, y).
  DiscreteMeasure merged(double tol = 1e-12) const;
  DiscreteMeasure normalized() const;
  Point mean() const;

  static DiscreteMeasure dirac(Point p) { return DiscreteMeasure{{p}, {1.0}}; }
  // Rows "x,y,weight"; blank lines and lines starting with '#' are skipped.
  static DiscreteMeasure read_csv(std::istream& in);
  void write_csv(std::ostream& out) const;
};

struct W1Result {
  double value = 0;  // primal cost
  double dual = 0;
  double gap = 0;  // |value − dual|
  std::vector<PlanEntry> plan;
  std::vector<double> u, v;  // u_i + v_j ≤ d(x_i, y_j)
  // Merged supports that plan and potentials index into.
  DiscreteMeasure source, target;
};

// Exact Wasserstein-1 distance with Euclidean ground cost.
W1Result w1_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Upper bound on W1 for large clouds: both measures are binned on a lattice
// of the given spacing, the bin centroids are transported exactly, and the
// exact cost of moving each point to its centroid is added on both sides.
struct BinnedW1 {
  double upper = 0;
  double core = 0;  // exact W1 between the binned measures
  double quantization = 0;
  std::size_t bins_mu = 0, bins_nu = 0;
};
BinnedW1 w1_binned_upper(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double spacing);

// Lipschitz edges of a grid: 4-neighbours at cell_size and diagonal
// neighbours at √2·cell_size.
struct LipEdge {
  std::size_t a = 0, b = 0;
  double length = 0;
};
std::vector<LipEdge> lip_edges(const GridSpace& space);

// Moves the values of an edge pair symmetrically until |f(a) − f(b)| ≤
// length; a pinned side stays put and the other absorbs the whole excess.
void clip_pair(double& fa, double& fb, double length, bool pin_a = false, bool pin_b = false);

// Cyclic pairwise clipping over lip_edges until the largest violation is
// below 1e-10. In marked-infinity mode frame values are pinned to 0. Throws
// after max_sweeps sweeps.
GridFunction lip_project(const GridSpace& space, const GridFunction& f, std::size_t max_sweeps = 100000);

// Largest |f(a) − f(b)| / d(a, b) over all pairs of cells, with f read as 0
// outside the admissible cells in marked-infinity mode.
double lipschitz_constant(const GridSpace& space, const GridFunction& f);

struct KrLowerBound {
  double value = 0;  // certified: raw_gap / max(1, lipschitz)
  GridFunction witness;  // best function found, before that scaling
  double raw_gap = 0;  // |ρ_μ(witness) − ρ_ν(witness)|
  double lipschitz = 0;  // true Euclidean Lipschitz constant of the witness
};

// Lower bound on the KR distance between two grid measures by projected
// ascent over grid-Lipschitz functions. The best function is divided by its
// true Euclidean Lipschitz constant, so the result is a valid lower bound.
// Deficient measures restrict the search to f ≥ 0.
KrLowerBound d_kr_topo_lower(const TopoMeasure& mu, const TopoMeasure& nu, std::size_t restarts, std::size_t iters,
                             std::uint64_t seed);

}  // namespace qm
