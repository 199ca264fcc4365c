#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qm/image_transform.hpp"
#include "qm/kr.hpp"
#include "qm/measure.hpp"

namespace qm {

// x ↦ (a·x + b·y + e, c·x + d·y + f).
struct AffineMap {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  Point operator()(Point p) const { return {a * p.x + b * p.y + e, c * p.x + d * p.y + f}; }
  Point linear(Point v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  // Operator norm of the linear part: the Lipschitz factor of the map.
  double factor() const;
  // Unique fixed point when 1 is not an eigenvalue.
  std::optional<Point> fixed_point() const;

  static AffineMap similarity(double s, Point shift) { return {s, 0, 0, s, shift.x, shift.y}; }
};

// Either grid transforms (S(μ) = Σ α_i q_i*(μ)) or affine maps
// (M(ν) = Σ α_i ν∘u_i⁻¹). `tail_bound` is the mass of the terms dropped
// when the system was truncated from an infinite generator.
struct TransformSystem {
  std::vector<ImageTransform> transforms;
  std::vector<AffineMap> maps;
  std::vector<double> alphas;
  std::vector<double> factors;  // contraction factor per term
  double tail_bound = 0;

  bool continuous() const { return !maps.empty(); }
  std::size_t size() const { return alphas.size(); }
  double alpha_sum() const;
  double contraction_factor() const;  // max of factors
};

// `factors` are declared contraction factors of the grid transforms
// (default 1).
TransformSystem make_system(std::vector<ImageTransform> transforms, std::vector<double> alphas,
                            std::vector<double> factors = {});
TransformSystem make_system(std::vector<AffineMap> maps, std::vector<double> alphas);

// Infinite system given term by term (i = 1, 2, ...). `tail(k)` must bound
// Σ_{i>k} α_i; terms are taken until the bound drops below eps.
struct SystemGenerator {
  std::function<double(std::size_t)> alpha;
  std::function<double(std::size_t)> tail;
  std::function<ImageTransform(std::size_t)> transform;  // grid backend
  std::function<AffineMap(std::size_t)> map;             // continuous backend
};
TransformSystem make_system(const SystemGenerator& gen, double eps, std::size_t max_terms = 100000);

// Three maps x ↦ x/2 + v over the vertices of the unit-side triangle with
// α = 1/3 each.
TransformSystem sierpinski_system();

// S^level(μ) on a grid, evaluated by word expansion with a memo keyed on
// (level, region).
class LazyMeasure {
 public:
  static constexpr int max_level = 10;

  LazyMeasure(TransformSystem system, TopoMeasure root, int level);

  double operator()(const Region& a) const;
  int level() const;
  LazyMeasure next() const;
  TopoMeasure measure() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
  int level_ = 0;
};

LazyMeasure apply(const TransformSystem& system, const TopoMeasure& mu);

// Pushforward mixture, merged at 1e-12. Throws when the support would
// exceed `cap`.
DiscreteMeasure apply_discrete(const TransformSystem& system, const DiscreteMeasure& nu,
                               std::size_t cap = std::size_t{1} << 21);

struct DiscreteFixedPoint {
  DiscreteMeasure measure;   // last iterate that was materialized
  std::size_t level = 0;     // its index k in S^k(μ₀)
  std::size_t iterations = 0;
  std::vector<double> trace;  // d_k ≥ w1(S^k μ₀, S^{k+1} μ₀)
  std::vector<bool> exact;    // false: certified upper bound
  bool converged = false;
};

// Iterates until d_k ≤ tol or max_iter. Distances are exact while both
// iterates have at most `exact_cap` support points; after that the last
// optimal plan is pushed through the maps, which bounds later distances
// from above. Once the pushed plan would exceed 2^16 entries the bound
// s·d_{k−1} is used instead. Throws "contraction violated" when the trace
// fails to decrease for 5 consecutive steps.
DiscreteFixedPoint fixed_point(const TransformSystem& system, const DiscreteMeasure& mu0, double tol,
                               std::size_t max_iter, std::size_t exact_cap = 1024);

struct GridFixedPoint {
  std::optional<LazyMeasure> measure;
  std::size_t iterations = 0;
  std::vector<double> trace;      // max of the two columns below
  std::vector<double> kr_lower;   // KR lower bound between consecutive iterates
  std::vector<double> probe_sup;  // sup over the probe family
  bool converged = false;
};

// Fixed 64-region probe family for a grid.
std::vector<Region> probe_family(const GridSpace& space, std::uint64_t seed, std::size_t count = 64);

GridFixedPoint fixed_point(const TransformSystem& system, const TopoMeasure& mu0, double tol, std::size_t max_iter,
                           std::uint64_t seed, std::size_t kr_restarts = 2, std::size_t kr_iters = 10);

// Points x_{k+1} = u_{I_k}(x_k) after burn_in steps, each with weight 1/N.
DiscreteMeasure chaos_game(const TransformSystem& system, std::size_t n, std::size_t burn_in, std::uint64_t seed);

struct ContractionReport {
  std::vector<double> ratios;
  double max_ratio = 0;
  double factor = 0;
  bool contraction = false;  // factor < 1 and every ratio ≤ factor + 1e-9
};

// Continuous: w1(Mμ, Mν) / w1(μ, ν) over random pairs. Grid: δ(K, G) /
// δ'(q(K), q(G)) over random compact pairs with nonempty images, per
// transform, against its declared factor.
ContractionReport contraction_check(const TransformSystem& system, std::size_t trials, std::uint64_t seed);

// Distance between the closed squares of two cell sets.
double set_distance(const GridSpace& space, const CellSet& a, const CellSet& b);

struct Bounds {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
};

struct Raster {
  int width = 0, height = 0;
  std::vector<double> mass;            // row-major, row 0 at ymax
  std::vector<std::uint64_t> counts;   // points per pixel
  std::vector<std::uint8_t> gray;      // log-scaled
};

Raster render_density(const DiscreteMeasure& nu, int resolution, Bounds bounds);
void write_ppm(const Raster& r, std::ostream& out);

}  // namespace qm
