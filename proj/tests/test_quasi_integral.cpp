#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qm/error.hpp"
#include "qm/quasi_integral.hpp"
#include "qm/random.hpp"
#include "qm/sampling.hpp"
#include "qm/solid_set_function.hpp"

using namespace qm;

namespace {

struct Named {
  std::string name;
  TopoMeasure mu;
};

std::vector<Named> gallery(const GridSpace& s) {
  std::vector<double> w(s.cell_count(), 0);
  w[3] = 1;
  w[20] = 2;
  w[33] = 1;
  return {
      {"point_mass", point_mass(s, 14)},
      {"cell_count", cell_count_measure(s)},
      {"weighted", weighted_measure(s, w)},
      {"three_points", extend(make_point_config(s, {0, 14, 35}))},
      {"five_points", extend(make_point_config(s, {0, 2, 14, 30, 35}))},
      {"aarnes_circle", extend(make_aarnes_circle(s, 14))},
      {"diffuse", make_diffuse_dtm(s, s.rect(2, 2, 3, 3, Role::compact).cells)},
      {"mixture", linear_combination({{0.5, point_mass(s, 7)}, {0.25, extend(make_point_config(s, {0, 14, 35}))}})},
  };
}

// Integer-valued function with values in [lo, hi].
GridFunction random_integer_function(const GridSpace& s, Rng& rng, int lo, int hi) {
  GridFunction f(s.cell_count());
  for (auto i : s.interior().indices()) f[i] = rng.range(lo, hi);
  return f;
}

// Unit-step sum for integer-valued f: min·μ(X) + Σ_k μ({f > k + 1/2}).
double unit_step_oracle(const TopoMeasure& mu, const GridFunction& f) {
  const GridSpace& s = mu.space();
  double lo = 1e300, hi = -1e300;
  for (auto i : s.interior().indices()) lo = std::min(lo, f[i]), hi = std::max(hi, f[i]);
  if (s.mode() == Mode::marked_infinity) lo = std::min(lo, 0.0);
  double sum = lo * mu(s.full(Role::compact));
  for (double k = lo; k < hi; k += 1) {
    Region up = s.empty(Role::open);
    for (auto i : s.interior().indices())
      if (f[i] > k + 0.5) up.cells.set(i);
    sum += mu(up);
  }
  return sum;
}

// Exact for dyadic measures; cell-count values carry rounding.
bool close(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); }

double sup_over(const GridSpace& s, const GridFunction& f, const GridFunction& g) {
  double m = 0;
  for (auto i : s.interior().indices()) m = std::max(m, std::abs(f[i] - g[i]));
  return m;
}

}  // namespace

TEST_CASE("superlevel sets") {
  const GridSpace s(4, 4, Mode::compact);
  const GridFunction zero(16);
  CHECK(superlevel(s, zero, -1, true) == s.full(Role::open));
  CHECK(superlevel(s, zero, 0, true).empty());
  CHECK(superlevel(s, zero, 0, false) == s.full(Role::compact));
  const Region block = s.rect(1, 1, 2, 3, Role::compact);
  const GridFunction ind = indicator_function(s, block.cells);
  CHECK(superlevel(s, ind, 0.5, false) == block);
  CHECK(superlevel(s, ind, 0.5, true).cells == block.cells);
}

TEST_CASE("quasi-integral examples") {
  const GridSpace s(6, 6, Mode::compact);
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    GridFunction f(36);
    for (auto& v : f.values) v = rng.uniform(-3, 3);
    CHECK(quasi_integral(point_mass(s, 9), f) == doctest::Approx(f[9]).epsilon(1e-14));
    double mean = 0;
    for (double v : f.values) mean += v;
    CHECK(quasi_integral(cell_count_measure(s), f) == doctest::Approx(mean / 36).epsilon(1e-12));
  }
  // A bump around p that vanishes on the boundary layer.
  const GridSpace d = GridSpace::disk(11, 5.2);
  const std::size_t p = d.index(5, 5);
  const TopoMeasure circle = extend(make_aarnes_circle(d, p));
  const GridFunction bump = radial_function(d, d.center(p), 3.5, 2.0);
  for (auto b : boundary_cells(d).indices()) REQUIRE(bump[b] == 0);
  CHECK(quasi_integral(circle, bump) == 0);
  // Positive on the boundary layer: the boundary level decides.
  GridFunction lifted = bump;
  for (auto i : d.interior().indices()) lifted[i] += 1;
  CHECK(quasi_integral(circle, lifted) == 1);
}

TEST_CASE("profile is nonincreasing and bounded") {
  const GridSpace s(6, 6, Mode::compact);
  Rng rng(2);
  for (const auto& g : gallery(s)) {
    for (int t = 0; t < 30; ++t) {
      const GridFunction f = random_integer_function(s, rng, 0, 6);
      const LevelProfile p = level_profile(g.mu, f);
      CHECK(std::is_sorted(p.thresholds.begin(), p.thresholds.end()));
      for (std::size_t j = 0; j < p.r1.size(); ++j) {
        CHECK(p.r1[j] >= 0);
        CHECK(p.r1[j] <= p.total + 1e-15);
        if (j) CHECK(p.r1[j] <= p.r1[j - 1]);
      }
    }
  }
}

TEST_CASE("sweep matches the unit-step oracle") {
  for (Mode mode : {Mode::compact, Mode::marked_infinity}) {
    const GridSpace s(6, 6, mode);
    std::vector<Named> ms;
    if (mode == Mode::compact)
      ms = gallery(s);
    else
      ms = {{"two_point_weighted", extend(make_weighted_two_point(s, s.index(2, 2), s.index(3, 3), 1))},
            {"point_mass", point_mass(s, s.index(2, 3))}};
    Rng rng(3);
    for (const auto& g : ms)
      for (int t = 0; t < 100; ++t) {
        GridFunction f = random_integer_function(s, rng, g.mu.kind() == MeasureKind::deficient ? 0 : -4, 5);
        if (mode == Mode::marked_infinity) {
          for (auto i : s.frame().indices()) f[i] = 0;
        }
        CHECK_MESSAGE(close(quasi_integral(g.mu, f), unit_step_oracle(g.mu, f)), g.name);
      }
  }
}

TEST_CASE("functional properties on the gallery") {
  const GridSpace s(6, 6, Mode::compact);
  for (const auto& g : gallery(s)) {
    Rng rng(derive_seed(4, stream_id(g.name)));
    const double total = g.mu(s.full(Role::compact));
    for (int t = 0; t < 100; ++t) {
      const GridFunction f = random_integer_function(s, rng, 0, 8);
      const double rf = quasi_integral(g.mu, f);
      INFO(g.name);

      for (double c : {0.0, 0.5, 2.0, 3.0}) {
        GridFunction cf = f;
        for (auto& v : cf.values) v *= c;
        CHECK(close(quasi_integral(g.mu, cf), c * rf));
      }

      GridFunction h = f;
      for (auto i : s.interior().indices()) h[i] += rng.range(0, 2);
      CHECK(quasi_integral(g.mu, h) >= rf);

      CHECK(std::abs(rf) <= sup_norm(s, f) * total);

      // Supports apart: no cell of one touches a cell of the other, so every
      // superlevel set of the sum is a disjoint union of open sets.
      const CellSet half = random_half_plane(s, rng);
      GridFunction a = f, b = random_integer_function(s, rng, 0, 8), ab(36);
      const CellSet near = dilate(s, half, Adjacency::eight);
      for (std::size_t i = 0; i < 36; ++i) {
        if (!half.test(i)) b[i] = 0;
        if (near.test(i)) a[i] = 0;
        ab[i] = a[i] + b[i];
      }
      CHECK(close(quasi_integral(g.mu, ab), quasi_integral(g.mu, a) + quasi_integral(g.mu, b)));

      // Two functions supported in a shared compact set K.
      const Region k = random_solid(s, Role::compact, rng, random_size(s, rng));
      GridFunction u(36), v(36);
      for (auto i : k.cells.indices()) u[i] = rng.range(0, 6), v[i] = rng.range(0, 6);
      CHECK(std::abs(quasi_integral(g.mu, u) - quasi_integral(g.mu, v)) <= sup_over(s, u, v) * g.mu(k));

      // Nondecreasing piecewise-linear functions of f vanishing at 0.
      auto phi = [](double x) { return x <= 3 ? 0.0 : 2 * (x - 3); };
      auto psi = [](double x) { return std::min(x, 4.0); };
      GridFunction pf(36), sf(36), both(36);
      for (std::size_t i = 0; i < 36; ++i) {
        pf[i] = phi(f[i]);
        sf[i] = psi(f[i]);
        both[i] = pf[i] + sf[i];
      }
      CHECK(close(quasi_integral(g.mu, both), quasi_integral(g.mu, pf) + quasi_integral(g.mu, sf)));

      if (g.mu.kind() != MeasureKind::deficient) {
        GridFunction shifted = f;
        for (auto& x : shifted.values) x -= 5;
        CHECK(quasi_integral(g.mu, shifted) == doctest::Approx(rf - 5 * total).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("quasi-integrals of indicators recover the measure") {
  const GridSpace s(5, 5, Mode::compact);
  const std::vector<Named> small{
      {"point_mass", point_mass(s, 12)},
      {"three_points", extend(make_point_config(s, {0, 12, 24}))},
      {"three_points_moved", extend(make_point_config(s, {0, 12, 23}))},
      {"aarnes_circle", extend(make_aarnes_circle(s, 12))},
      {"cell_count", cell_count_measure(s)},
  };
  Rng rng(5);
  std::vector<std::vector<double>> seen(small.size());
  for (int t = 0; t < 3000; ++t) {
    const Region u = random_cells(s, Role::open, rng, rng.uniform());
    const GridFunction ind = indicator_function(s, u.cells);
    for (std::size_t m = 0; m < small.size(); ++m) {
      const double r = quasi_integral(small[m].mu, ind);
      CHECK(r == small[m].mu(u));
      seen[m].push_back(r);
    }
  }
  // Distinct measures are told apart by some sampled function.
  for (std::size_t a = 0; a < small.size(); ++a)
    for (std::size_t b = a + 1; b < small.size(); ++b) CHECK_MESSAGE(seen[a] != seen[b], small[a].name << " " << small[b].name);
}

TEST_CASE("nonlinearity witnesses") {
  const GridSpace s(7, 7, Mode::compact);
  CHECK_FALSE(find_nonlinearity_witness(point_mass(s, 10), 300, 1).has_value());
  CHECK_FALSE(find_nonlinearity_witness(cell_count_measure(s), 300, 1).has_value());
  const TopoMeasure three = extend(make_point_config(s, {s.index(0, 0), s.index(6, 0), s.index(3, 6)}));
  const auto w = find_nonlinearity_witness(three, 2000, 1);
  REQUIRE(w.has_value());
  CHECK(std::abs(w->rho_sum - w->rho_f - w->rho_g) > 1e-6);
  GridFunction sum(49);
  for (std::size_t i = 0; i < 49; ++i) sum[i] = w->f[i] + w->g[i];
  CHECK(quasi_integral(three, sum) == w->rho_sum);
  CHECK(quasi_integral(three, w->f) == w->rho_f);
}

TEST_CASE("domain errors") {
  const GridSpace s(4, 4, Mode::compact);
  const TopoMeasure dtm = make_diffuse_dtm(s, s.rect(1, 1, 2, 1, Role::compact).cells);
  GridFunction f(16, 1);
  f[5] = -1;
  CHECK_THROWS_WITH_AS(quasi_integral(dtm, f), "p-conic domain violated", Error);
  const GridSpace m(6, 6, Mode::marked_infinity);
  GridFunction g(36);
  g[m.index(1, 1)] = 1;
  CHECK_THROWS_AS(quasi_integral(point_mass(m, m.index(2, 2)), g), Error);
  CHECK_THROWS_AS(quasi_integral(point_mass(s, 1), GridFunction(9)), Error);
}
