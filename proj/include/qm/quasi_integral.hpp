#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qm/grid.hpp"
#include "qm/measure.hpp"

namespace qm {

// Cells with f > t (strict, open-role) or f ≥ t (compact-role).
Region superlevel(const GridSpace& space, const GridFunction& f, double t, bool strict);

// Step profile of t ↦ μ({f > t}): r1[j] is the value on [thresholds[j],
// thresholds[j+1]). `base` is the lower integration limit.
struct LevelProfile {
  std::vector<double> thresholds;
  std::vector<double> r1;
  double base = 0;
  double total = 0;  // μ(X)
};

LevelProfile level_profile(const TopoMeasure& mu, const GridFunction& f);

// base·μ(X) + Σ_j (v_{j+1} − v_j)·μ({f > v_j}) over the distinct values of f,
// summed in increasing threshold order.
double quasi_integral(const TopoMeasure& mu, const GridFunction& f);

struct NonlinearityWitness {
  GridFunction f, g;
  double rho_f = 0, rho_g = 0, rho_sum = 0;
};

// Random search over pairs of piecewise-radial bumps for ρ(f+g) ≠ ρ(f)+ρ(g).
std::optional<NonlinearityWitness> find_nonlinearity_witness(const TopoMeasure& mu, std::size_t trials,
                                                             std::uint64_t seed);

}  // namespace qm
