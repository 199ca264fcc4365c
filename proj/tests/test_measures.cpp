#include <cmath>

#include "doctest.h"
#include "qm/error.hpp"
#include "qm/parallel.hpp"
#include "qm/sampling.hpp"
#include "qm/solid_set_function.hpp"
#include "tm1_oracle.hpp"

using namespace qm;
using oracle::Mask;

namespace {

struct Gallery {
  std::string name;
  SolidSetFunction seed;
};

std::vector<Gallery> compact_gallery(const GridSpace& s) {
  const auto mid = s.index(s.width() / 2, s.height() / 2);
  return {
      {"point_mass", make_point_mass_seed(s, mid)},
      {"three_points", make_point_config(s, {s.index(0, 0), mid, s.index(s.width() - 1, s.height() - 1)})},
      {"five_points", make_point_config(s, {s.index(0, 0), s.index(1, 0), mid, s.index(0, s.height() - 1),
                                            s.index(s.width() - 1, s.height() - 1)})},
      {"aarnes_circle", make_aarnes_circle(s, s.index(1, 1))},
  };
}

Region cells(const GridSpace& s, std::initializer_list<std::pair<int, int>> xy, Role role) {
  Region r = s.empty(role);
  for (auto [x, y] : xy) r.cells.set(s.index(x, y));
  return r;
}

}  // namespace

TEST_CASE("point mass seed extends to the point mass") {
  const GridSpace s(4, 4, Mode::compact);
  const std::size_t x = s.index(2, 1);
  const auto seed = make_point_mass_seed(s, x);
  CHECK(check_ssf_axioms(seed, 500, 1).pass);
  const TopoMeasure mu = extend(seed);
  for (Mask m = 0; m <= oracle::kAll; ++m)
    for (Role role : {Role::compact, Role::open}) {
      const Region r = oracle::region(s, m, role);
      CHECK(mu(r) == (r.cells.test(x) ? 1.0 : 0.0));
    }
  CHECK(mu(s.full(Role::compact)) == seed.total());
}

TEST_CASE("square of the cell count is not a solid-set function") {
  const GridSpace s(5, 5, Mode::compact);
  const SolidSetFunction sq(
      s, [](const Region& r) -> std::optional<double> { return double(r.size()) * double(r.size()); }, "square");
  const CheckReport rep = check_ssf_axioms(sq, 500, 4);
  REQUIRE_FALSE(rep.pass);
  CHECK(rep.failed == "(s4) partition additivity");
  REQUIRE(rep.witness.size() == 2);
  const double a = rep.witness[0].size(), b = rep.witness[1].size();
  CHECK(a + b == 25);
  CHECK(rep.values == std::vector<double>{a * a, b * b, 625});
}

TEST_CASE("valuation gaps are errors") {
  const GridSpace s(4, 4, Mode::compact);
  const SolidSetFunction partial(
      s, [&](const Region& r) -> std::optional<double> {
        if (r.size() == 3) return std::nullopt;
        return 0.0;
      },
      "partial");
  CHECK_THROWS_WITH_AS(check_ssf_axioms(partial, 2000, 1), doctest::Contains("valuation gap"), Error);
}

TEST_CASE("three-point configuration") {
  const GridSpace s(7, 7, Mode::compact);
  const std::size_t p = s.index(1, 3), q = s.index(3, 3), r = s.index(5, 3);
  const auto seed = make_point_config(s, {p, q, r});
  CHECK(check_ssf_axioms(seed, 1000, 2).pass);
  const TopoMeasure mu = extend(seed);
  const Region two = s.rect(0, 2, 3, 4, Role::compact);
  const Region one = s.rect(0, 0, 1, 6, Role::compact);
  const Region none = s.rect(0, 0, 6, 1, Role::compact);
  CHECK(mu(two) == 1);
  CHECK(mu(one) == 0);
  CHECK(mu(none) == 0);
  // Two separated blocks holding one point each.
  const Region apart{s.rect(0, 2, 1, 4, Role::compact).cells | s.rect(3, 2, 3, 4, Role::compact).cells, Role::compact};
  CHECK(mu(apart) == 0);
  CHECK(mu(s.full(Role::open)) == 1);
  CHECK_THROWS_AS(make_point_config(s, {p, q}), Error);
  CHECK_THROWS_AS(make_point_config(s, {p, q, q}), Error);
}

TEST_CASE("five-point configuration takes values i/n") {
  const GridSpace s(9, 3, Mode::compact);
  std::vector<std::size_t> pts;
  for (int x = 0; x < 9; x += 2) pts.push_back(s.index(x, 1));
  const TopoMeasure mu = extend(make_point_config(s, pts));
  // Initial segments holding k of the points: floor(k/2)/2.
  for (int k = 0; k <= 5; ++k) {
    const int x1 = k == 0 ? 0 : std::min(8, 2 * (k - 1) + 1);
    const Region seg = k == 0 ? s.empty(Role::compact) : s.rect(0, 0, x1, 2, Role::compact);
    CHECK(mu(seg) == doctest::Approx((k / 2) / 2.0));
  }
}

TEST_CASE("weighted two-point example") {
  const int n = 128;
  const double h = 6.0 / n;
  const GridSpace s(n, n, Mode::marked_infinity, h, {-2 + h / 2, -3 + h / 2});
  auto at = [&](double x, double y) { return s.index(int((x + 2) / h), int((y + 3) / h)); };
  const TopoMeasure mu = extend(make_weighted_two_point(s, at(0, 0), at(2, 0), h * h));
  const Region k1 = s.ball({0, 0}, 1, Role::compact), k2 = s.ball({2, 0}, 1, Role::compact);
  const Region c{k1.cells | k2.cells, Role::compact};
  REQUIRE(is_solid(s, c));
  const double tol = 4 / std::sqrt(1 / (h * h));
  CHECK(std::abs(mu(k1) - M_PI) <= tol * M_PI);
  CHECK(std::abs(mu(k2) - M_PI) <= tol * M_PI);
  CHECK(std::abs(mu(c) - 4 * M_PI) <= tol * 4 * M_PI);
  CHECK(mu(s.ball({0, 2}, 0.5, Role::compact)) == 0);
  // Each disk holds one point, so its value is its area exactly.
  CHECK(mu(k1) == k1.size() * h * h);
  CHECK(mu(c) == 2 * c.size() * h * h);

  const CheckReport rep = check_measure_criteria(mu, 20, 3, {{k1, k2}});
  REQUIRE_FALSE(rep.pass);
  CHECK(rep.failed == "subadditivity");
  CHECK(rep.witness.size() >= 2);
  CHECK_THROWS_AS(make_weighted_two_point(GridSpace(5, 5, Mode::compact), 6, 7, 1), Error);
}

TEST_CASE("Aarnes circle") {
  const GridSpace d = GridSpace::disk(11, 5.2);
  const std::size_t p = d.index(5, 5);
  const auto seed = make_aarnes_circle(d, p);
  CHECK(check_ssf_axioms(seed, 1000, 3).pass);
  const TopoMeasure mu = extend(seed);
  const CellSet b = boundary_cells(d);
  Region arc1 = d.empty(Role::compact), arc2 = d.empty(Role::compact);
  for (auto c : b.indices()) (d.y_of(c) <= 5 ? arc1 : arc2).cells.set(c);
  const Region inside{d.interior() - b, Role::open};
  CHECK(is_solid(d, arc1));
  CHECK(is_solid(d, arc2));
  CHECK(mu(d.full(Role::compact)) == 1);
  CHECK(mu(arc1) == 0);
  CHECK(mu(arc2) == 0);
  CHECK(mu(inside) == 0);
  CHECK(mu(Region{b, Role::compact}) == 1);
  // Solid set holding p and reaching the boundary.
  CHECK(mu(d.rect(5, 5, 10, 5, Role::compact)) == 1);
  CHECK_THROWS_AS(make_aarnes_circle(d, b.first()), Error);

  const CheckReport rep = check_measure_criteria(mu, 50, 1, {{arc1, arc2}});
  REQUIRE_FALSE(rep.pass);
  CHECK(rep.failed == "subadditivity");
}

TEST_CASE("diffuse deficient measure") {
  const GridSpace s(6, 6, Mode::compact);
  const Region dset = s.rect(2, 2, 3, 2, Role::compact);
  const TopoMeasure mu = make_diffuse_dtm(s, dset.cells);
  CHECK(mu.kind() == MeasureKind::deficient);
  CHECK(mu(s.rect(1, 1, 4, 4, Role::open)) == 1);
  CHECK(mu(s.rect(0, 0, 5, 0, Role::compact)) == 0);
  CHECK(mu(s.region({s.index(2, 2)}, Role::compact)) == 0);
  CHECK_THROWS_AS(make_diffuse_dtm(s, cells(s, {{0, 0}, {3, 3}}, Role::compact).cells), Error);

  // Compact pairs never detect it; a compact piece plus the open rest does.
  CHECK(check_tm1_sampled(mu, 500, 5).pass);
  const Region a = s.region({s.index(2, 2)}, Role::compact);
  const Region rest = complement(s, a);
  REQUIRE(tm1_admissible(s, a, rest, Role::compact));
  CHECK(mu(a) + mu(rest) == 0);
  CHECK(mu(s.full(Role::compact)) == 1);
}

TEST_CASE("measure criteria pass for a point mass") {
  const GridSpace s(8, 8, Mode::compact);
  CHECK(check_measure_criteria(point_mass(s, 27), 2000, 9).pass);
  CHECK(check_measure_criteria(cell_count_measure(s), 500, 9).pass);
}

TEST_CASE("tm1_admissible agrees with the bitmask oracle") {
  for (bool marked : {false, true}) {
    const GridSpace s = marked ? GridSpace(6, 6, Mode::marked_infinity) : GridSpace(4, 4, Mode::compact);
    const int off = marked ? 1 : 0;
    const auto blk = oracle::make_block(marked);
    const Mask pre = oracle::precompact_cells(blk);
    Rng rng(marked ? 21 : 20);
    std::size_t positives = 0;
    for (int t = 0; t < 40000; ++t) {
      // Sparse and precompact-restricted draws keep positives frequent.
      auto draw = [&] {
        Mask m = static_cast<Mask>(rng.below(1 << 16));
        if (rng.coin()) m &= static_cast<Mask>(rng.below(1 << 16));
        if (rng.coin()) m &= pre;
        return m;
      };
      const Mask a = draw();
      const Mask b = draw() & ~a;
      const int kind = static_cast<int>(rng.below(4));
      bool expect = false;
      bool got = false;
      const Region ca = oracle::region(s, a, Role::compact, off), oa = oracle::region(s, a, Role::open, off);
      const Region cb = oracle::region(s, b, Role::compact, off), ob = oracle::region(s, b, Role::open, off);
      switch (kind) {
        case 0:
          expect = oracle::cc(blk, a, b) && !(a & ~pre) && !(b & ~pre);
          got = tm1_admissible(s, ca, cb, Role::compact);
          break;
        case 1:
          expect = oracle::oo(blk, a, b);
          got = tm1_admissible(s, oa, ob, Role::open);
          break;
        case 2:
          expect = oracle::co_compact(blk, a, b) && !((a | b) & ~pre);
          got = tm1_admissible(s, ca, ob, Role::compact);
          break;
        default:
          expect = oracle::co_open(blk, a, b) && !(a & ~pre);
          got = tm1_admissible(s, ca, ob, Role::open);
      }
      positives += expect;
      if (got != expect) FAIL_CHECK("kind " << kind << " a " << a << " b " << b << " marked " << marked);
    }
    CHECK(positives > 2000);
  }
}

TEST_CASE("extension reproduces the seed on solid regions") {
  for (Mode mode : {Mode::compact, Mode::marked_infinity}) {
    const GridSpace s(9, 8, mode);
    std::vector<Gallery> seeds;
    if (mode == Mode::compact)
      seeds = compact_gallery(s);
    else
      seeds = {{"two_point_weighted", make_weighted_two_point(s, s.index(3, 3), s.index(5, 4), 0.25)},
               {"point_mass", make_point_mass_seed(s, s.index(4, 4))}};
    for (const auto& g : seeds) {
      const TopoMeasure mu = extend(g.seed);
      Rng rng(8);
      for (int t = 0; t < 400; ++t) {
        const Region a = random_solid(s, t % 2 ? Role::open : Role::compact, rng, random_size(s, rng));
        if (mode == Mode::marked_infinity && a.role == Role::compact && !is_precompact(s, a)) continue;
        CHECK_MESSAGE(mu(a) == *g.seed.valuate(a), g.name);
      }
    }
  }
}

TEST_CASE("sampled TM1, superadditivity and complement identity for the gallery") {
  const GridSpace s(5, 5, Mode::compact);
  for (const auto& g : compact_gallery(s)) {
    const TopoMeasure mu = extend(g.seed);
    CHECK_MESSAGE(check_tm1_sampled(mu, 1000, 31).pass, g.name);
    CHECK_MESSAGE(check_superadditivity(mu, 1000, 32).pass, g.name);
    Rng rng(33);
    const double total = mu(s.full(Role::compact));
    for (int t = 0; t < 3000; ++t) {
      const Region a = random_cells(s, t % 2 ? Role::open : Role::compact, rng, rng.uniform());
      CHECK_MESSAGE(mu(a) + mu(complement(s, a)) == doctest::Approx(total).epsilon(1e-12), g.name);
    }
  }
  const GridSpace m(8, 8, Mode::marked_infinity);
  const TopoMeasure two = extend(make_weighted_two_point(m, m.index(2, 3), m.index(5, 4), 1));
  CHECK(check_tm1_sampled(two, 1000, 34).pass);
  CHECK(check_superadditivity(two, 1000, 35).pass);
}

TEST_CASE("simple measures: value one forces zero on the complement") {
  const GridSpace s(6, 6, Mode::compact);
  const std::vector<TopoMeasure> simple{extend(make_point_mass_seed(s, 14)),
                                        extend(make_point_config(s, {0, 14, 35})),
                                        extend(make_aarnes_circle(s, 14))};
  Rng rng(41);
  for (const auto& mu : simple)
    for (int t = 0; t < 500; ++t) {
      const Region a = random_solid(s, t % 2 ? Role::open : Role::compact, rng, random_size(s, rng));
      const double v = mu(a);
      CHECK((v == 0 || v == 1));
      if (v == 1 && a.cells != s.interior()) CHECK(mu(complement(s, a)) == 0);
    }
}

TEST_CASE("memoized evaluation is the same under concurrency") {
  const GridSpace s(10, 10, Mode::compact);
  const TopoMeasure shared = extend(make_point_config(s, {3, 44, 45, 70, 99}));
  Rng rng(51);
  std::vector<Region> regions;
  for (int t = 0; t < 400; ++t) regions.push_back(random_blobs(s, t % 2 ? Role::open : Role::compact, rng, 3, 12));
  std::vector<double> parallel(regions.size());
  parallel_for(regions.size(), [&](std::size_t i) { parallel[i] = shared(regions[i]); });
  const TopoMeasure fresh = extend(make_point_config(s, {3, 44, 45, 70, 99}));
  for (std::size_t i = 0; i < regions.size(); ++i) CHECK(parallel[i] == fresh(regions[i]));
}

TEST_CASE("linear combinations and weighted measures") {
  const GridSpace s(5, 5, Mode::compact);
  const TopoMeasure a = point_mass(s, 3), b = cell_count_measure(s);
  const TopoMeasure mix = linear_combination({{0.25, a}, {0.5, b}});
  Rng rng(61);
  for (int t = 0; t < 200; ++t) {
    const Region r = random_cells(s, Role::compact, rng, 0.4);
    CHECK(mix(r) == 0.25 * a(r) + 0.5 * b(r));
    CHECK(b(r) == doctest::Approx(r.size() / 25.0));
  }
  std::vector<double> w(25, 0);
  w[3] = 1;
  w[7] = 3;
  const TopoMeasure wm = weighted_measure(s, w);
  CHECK(wm(s.region({7}, Role::open)) == 0.75);
  CHECK(wm.kind() == MeasureKind::measure);
}
