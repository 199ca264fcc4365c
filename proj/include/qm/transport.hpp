#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qm/grid.hpp"

namespace qm {

struct PlanEntry {
  std::size_t from = 0;
  std::size_t to = 0;
  double mass = 0;
};

// Optimal balanced transport between supplies a and demands b. `u` and `v`
// are dual potentials with u_i + v_j ≤ c_ij; `dual` is Σ a_i u_i + Σ b_j v_j.
struct TransportResult {
  double cost = 0;
  double dual = 0;
  std::vector<PlanEntry> plan;
  std::vector<double> u, v;
  std::size_t pivots = 0;
};

// Primal network simplex on the complete bipartite graph with an artificial
// root, block-search pricing and the strongly feasible leaving-arc rule.
// Supplies and demands must be positive with equal totals (up to rounding).
TransportResult solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                const std::function<double(std::size_t, std::size_t)>& cost);

// Same with Euclidean ground cost between point sets.
TransportResult solve_transport(const std::vector<Point>& from, const std::vector<double>& supply,
                                const std::vector<Point>& to, const std::vector<double>& demand);

}  // namespace qm
