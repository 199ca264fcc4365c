#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qm/grid.hpp"

namespace qm {

enum class MeasureKind { topological, deficient, measure };

const char* kind_name(MeasureKind k);

// Set function on admissible regions of a grid. Evaluation is memoized when
// requested; the memo is shared by copies and guarded by a mutex, and a value
// is never overwritten once stored.
class TopoMeasure {
 public:
  using Evaluator = std::function<double(const Region&)>;

  TopoMeasure() = default;
  TopoMeasure(GridSpace space, MeasureKind kind, Evaluator eval, std::string name, bool memoize = false);

  double operator()(const Region& r) const;
  double total_mass() const;

  const GridSpace& space() const;
  MeasureKind kind() const;
  const std::string& name() const;
  bool valid() const { return static_cast<bool>(state_); }

 private:
  struct State;
  std::shared_ptr<State> state_;
};

TopoMeasure point_mass(const GridSpace& space, std::size_t cell);

// Uniform probability over the admissible cells.
TopoMeasure cell_count_measure(const GridSpace& space);

// Plain measure with the given per-cell weights, divided by their total.
// Integer-valued weights give evaluations that do not depend on summation
// order.
TopoMeasure weighted_measure(const GridSpace& space, std::vector<double> weights);

// Σ c_i μ_i with c_i ≥ 0. Terms are evaluated and summed in the given order.
TopoMeasure linear_combination(const std::vector<std::pair<double, TopoMeasure>>& terms);

}  // namespace qm
