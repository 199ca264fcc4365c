#include "qm/quasi_integral.hpp"

#include <algorithm>
#include <cmath>

#include "qm/error.hpp"
#include "qm/random.hpp"

namespace qm {

Region superlevel(const GridSpace& space, const GridFunction& f, double t, bool strict) {
  require(f.size() == space.cell_count(), "function does not match grid");
  Region r = space.empty(strict ? Role::open : Role::compact);
  for (auto i : space.interior().indices())
    if (strict ? f[i] > t : f[i] >= t) r.cells.set(i);
  return r;
}

LevelProfile level_profile(const TopoMeasure& mu, const GridFunction& f) {
  const GridSpace& space = mu.space();
  require(f.size() == space.cell_count(), "function does not match grid");
  std::vector<double> values;
  values.reserve(space.interior_count());
  for (auto i : space.interior().indices()) {
    require(std::isfinite(f[i]), "integrand must be finite");
    values.push_back(f[i]);
  }
  if (mu.kind() == MeasureKind::deficient)
    for (double v : values) require(v >= 0, "p-conic domain violated");
  if (space.mode() == Mode::marked_infinity)
    require(vanishes_near_ring(space, f), "integrand must vanish next to the infinity ring");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  LevelProfile p;
  p.total = mu.total_mass();
  p.base = space.mode() == Mode::compact ? values.front() : std::min(0.0, values.front());
  if (p.base < values.front()) p.thresholds.push_back(p.base);
  p.thresholds.insert(p.thresholds.end(), values.begin(), values.end());
  p.r1.reserve(p.thresholds.size());
  for (double t : p.thresholds) p.r1.push_back(mu(superlevel(space, f, t, true)));
  return p;
}

double quasi_integral(const TopoMeasure& mu, const GridFunction& f) {
  const LevelProfile p = level_profile(mu, f);
  double result = p.base * p.total;
  for (std::size_t j = 0; j + 1 < p.thresholds.size(); ++j)
    result += (p.thresholds[j + 1] - p.thresholds[j]) * p.r1[j];
  return result;
}

std::optional<NonlinearityWitness> find_nonlinearity_witness(const TopoMeasure& mu, std::size_t trials,
                                                             std::uint64_t seed) {
  const GridSpace& s = mu.space();
  Rng rng(derive_seed(seed, stream_id("nonlinearity")));
  const auto cells = s.interior().indices();
  const double span = std::max(s.width(), s.height()) * s.cell_size();
  auto bump = [&] {
    GridFunction f(s.cell_count());
    const int pieces = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < pieces; ++k) {
      const GridFunction r = radial_function(s, s.center(cells[rng.below(cells.size())]),
                                             rng.uniform(0.75, span), static_cast<double>(rng.range(1, 4)));
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::max(f[i], r[i]);
    }
    if (s.mode() == Mode::marked_infinity)
      for (auto i : s.frame().indices()) f[i] = 0;
    return f;
  };
  const double tol = 1e-9 * std::max(1.0, mu.total_mass());
  for (std::size_t t = 0; t < trials; ++t) {
    NonlinearityWitness w{bump(), bump()};
    GridFunction sum(s.cell_count());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = w.f[i] + w.g[i];
    w.rho_f = quasi_integral(mu, w.f);
    w.rho_g = quasi_integral(mu, w.g);
    w.rho_sum = quasi_integral(mu, sum);
    if (std::abs(w.rho_sum - w.rho_f - w.rho_g) > tol * (1 + sup_norm(s, sum))) return w;
  }
  return std::nullopt;
}

}  // namespace qm
