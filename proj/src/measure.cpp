#include "qm/measure.hpp"

#include <mutex>
#include <unordered_map>

#include "qm/error.hpp"

namespace qm {

const char* kind_name(MeasureKind k) {
  switch (k) {
    case MeasureKind::topological:
      return "topological";
    case MeasureKind::deficient:
      return "deficient";
    case MeasureKind::measure:
      return "measure";
  }
  return "?";
}

struct TopoMeasure::State {
  GridSpace space;
  MeasureKind kind;
  Evaluator eval;
  std::string name;
  bool memoize = false;
  mutable std::mutex mutex;
  mutable std::unordered_map<Region, double, RegionHash> memo;
};

namespace {
constexpr std::size_t kMemoCap = 1 << 18;
}

TopoMeasure::TopoMeasure(GridSpace space, MeasureKind kind, Evaluator eval, std::string name, bool memoize)
    : state_(std::make_shared<State>()) {
  state_->space = std::move(space);
  state_->kind = kind;
  state_->eval = std::move(eval);
  state_->name = std::move(name);
  state_->memoize = memoize;
}

const GridSpace& TopoMeasure::space() const { return state_->space; }
MeasureKind TopoMeasure::kind() const { return state_->kind; }
const std::string& TopoMeasure::name() const { return state_->name; }

double TopoMeasure::operator()(const Region& r) const {
  require(valid(), "measure is not initialized");
  state_->space.require_admissible(r);
  if (r.cells.none()) return 0.0;
  if (!state_->memoize) return state_->eval(r);
  {
    std::lock_guard<std::mutex> lock(state_->mutex);
    auto it = state_->memo.find(r);
    if (it != state_->memo.end()) return it->second;
  }
  const double v = state_->eval(r);
  std::lock_guard<std::mutex> lock(state_->mutex);
  if (state_->memo.size() >= kMemoCap) state_->memo.clear();
  state_->memo.emplace(r, v);
  return v;
}

double TopoMeasure::total_mass() const { return (*this)(state_->space.full(Role::compact)); }

TopoMeasure point_mass(const GridSpace& space, std::size_t cell) {
  require(cell < space.cell_count() && space.admissible(cell), "point mass must sit on an admissible cell");
  return TopoMeasure(
      space, MeasureKind::measure, [cell](const Region& r) { return r.cells.test(cell) ? 1.0 : 0.0; },
      "delta@" + std::to_string(space.x_of(cell)) + "," + std::to_string(space.y_of(cell)));
}

TopoMeasure cell_count_measure(const GridSpace& space) {
  const double n = static_cast<double>(space.interior_count());
  return TopoMeasure(
      space, MeasureKind::measure, [n](const Region& r) { return static_cast<double>(r.cells.count()) / n; },
      "cell_count");
}

TopoMeasure weighted_measure(const GridSpace& space, std::vector<double> weights) {
  require(weights.size() == space.cell_count(), "weight vector does not match grid");
  double total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i] >= 0, "weights must be nonnegative");
    if (!space.admissible(i)) weights[i] = 0;
    total += weights[i];
  }
  require(total > 0, "weights sum to zero");
  auto w = std::make_shared<std::vector<double>>(std::move(weights));
  return TopoMeasure(
      space, MeasureKind::measure,
      [w, total](const Region& r) {
        double s = 0;
        for (auto i : r.cells.indices()) s += (*w)[i];
        return s / total;
      },
      "weighted");
}

TopoMeasure linear_combination(const std::vector<std::pair<double, TopoMeasure>>& terms) {
  require(!terms.empty(), "empty linear combination");
  MeasureKind kind = MeasureKind::measure;
  std::string name;
  for (const auto& [c, m] : terms) {
    require(c >= 0, "linear combination coefficients must be nonnegative");
    require(m.space() == terms.front().second.space(), "linear combination across different grids");
    if (m.kind() == MeasureKind::deficient)
      kind = MeasureKind::deficient;
    else if (m.kind() == MeasureKind::topological && kind == MeasureKind::measure)
      kind = MeasureKind::topological;
    if (!name.empty()) name += "+";
    name += std::to_string(c) + "*" + m.name();
  }
  return TopoMeasure(
      terms.front().second.space(), kind,
      [terms](const Region& r) {
        double s = 0;
        for (const auto& [c, m] : terms) s += c * m(r);
        return s;
      },
      name);
}

}  // namespace qm
