#include <set>

#include "doctest.h"
#include "qm/error.hpp"
#include "qm/grid.hpp"
#include "qm/random.hpp"
#include "qm/sampling.hpp"
#include "tm1_oracle.hpp"

using namespace qm;
using oracle::Mask;

TEST_CASE("cell set operations agree with std::set") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(300);
    CellSet a(n), b(n);
    std::set<std::size_t> sa, sb;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.coin(0.3)) a.set(i), sa.insert(i);
      if (rng.coin(0.5)) b.set(i), sb.insert(i);
    }
    std::set<std::size_t> inter, uni, diff;
    for (auto i : sa) (sb.count(i) ? inter : diff).insert(i);
    uni = sa;
    uni.insert(sb.begin(), sb.end());
    auto as_set = [](const CellSet& c) {
      const auto v = c.indices();
      return std::set<std::size_t>(v.begin(), v.end());
    };
    CHECK(as_set(a & b) == inter);
    CHECK(as_set(a | b) == uni);
    CHECK(as_set(a - b) == diff);
    CHECK((a ^ b).count() == uni.size() - inter.size());
    CHECK(a.count() == sa.size());
    CHECK(a.subset_of(a | b));
    CHECK(a.intersects(b) == !inter.empty());
    CHECK(a.first() == (sa.empty() ? n : *sa.begin()));
    CHECK(CellSet::from_rle(a.to_rle(), n) == a);
  }
}

TEST_CASE("run-length text") {
  CellSet c = CellSet::from_rle("3.2.1", 8);
  CHECK(c.indices() == std::vector<std::size_t>{3, 4});
  // Trailing zeros are implicit.
  CHECK(c.to_rle() == "3.2");
  CHECK(CellSet(5).to_rle().empty());
  CHECK_THROWS_AS(CellSet::from_rle("4.9", 8), Error);
}

TEST_CASE("grid geometry") {
  const GridSpace s(5, 4, Mode::compact, 0.5, {1, 2});
  CHECK(s.cell_count() == 20);
  CHECK(s.center(s.index(0, 0)) == Point{1, 2});
  CHECK(s.center(s.index(3, 2)) == Point{2.5, 3});
  CHECK(s.rect(1, 1, 2, 3, Role::open).size() == 6);
  // Centers within 0.5 of (2, 3): the cell itself and its four neighbours.
  CHECK(s.ball({2, 3}, 0.5, Role::compact).size() == 5);
  CHECK_THROWS_AS(GridSpace(2, 5, Mode::compact), Error);

  const GridSpace m(6, 6, Mode::marked_infinity);
  CHECK(m.interior_count() == 16);
  CHECK(m.frame().count() == 12);
  CHECK_FALSE(m.admissible(0, 3));
  CHECK(m.admissible(1, 1));
}

TEST_CASE("digital disk") {
  const GridSpace d = GridSpace::disk(9, 4.3);
  std::size_t expect = 0;
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      const bool in = (x - 4) * (x - 4) + (y - 4) * (y - 4) <= 4.3 * 4.3;
      expect += in;
      CHECK(d.admissible(x, y) == in);
    }
  CHECK(d.interior_count() == expect);
  CHECK(is_solid(d, d.full(Role::compact)));
}

TEST_CASE("components") {
  const GridSpace s(4, 4, Mode::compact);
  CHECK(components(s, s.full(Role::compact)).size() == 1);
  CHECK(components(s, s.full(Role::open)).size() == 1);
  const auto one = components(s, s.region({5}, Role::compact));
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 1);
  CHECK(components(s, s.empty(Role::open)).empty());

  // Two cells meeting at a corner: the closed squares touch, the open ones
  // do not.
  const Region diag_open = s.region({s.index(1, 1), s.index(2, 2)}, Role::open);
  CHECK(components(s, diag_open).size() == 2);
  CHECK(components(s, diag_open, ComponentRule::complement).size() == 1);
  const Region diag_closed{diag_open.cells, Role::compact};
  CHECK(components(s, diag_closed).size() == 1);
  CHECK(components(s, diag_closed, ComponentRule::complement).size() == 2);
}

TEST_CASE("components partition the region and match a flood-fill oracle") {
  const GridSpace s(4, 4, Mode::compact);
  const auto blk = oracle::make_block(false);
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const Mask m = static_cast<Mask>(rng.below(1 << 16));
    const Role role = rng.coin() ? Role::compact : Role::open;
    const auto& nb = role == Role::compact ? blk.n8 : blk.n4;
    const auto expect = oracle::split(nb, m);
    const auto got = components(s, oracle::region(s, m, role));
    REQUIRE(got.size() == expect.size());
    CellSet all(s.cell_count());
    std::set<CellSet> parts;
    for (const auto& c : got) {
      CHECK_FALSE(all.intersects(c.cells));
      all |= c.cells;
      CHECK(c.role == role);
      parts.insert(c.cells);
    }
    CHECK(all == oracle::region(s, m, role).cells);
    for (Mask e : expect) CHECK(parts.count(oracle::region(s, e, role).cells) == 1);
  }
}

TEST_CASE("solid regions") {
  const GridSpace s(9, 9, Mode::compact);
  CHECK(is_solid(s, s.full(Role::compact)));
  const Region annulus{s.rect(2, 2, 6, 6, Role::compact).cells - s.rect(3, 3, 5, 5, Role::compact).cells,
                       Role::compact};
  CHECK_FALSE(is_solid(s, annulus));
  CHECK_THROWS_WITH_AS(is_solid(s, s.empty(Role::compact)), "empty set has no solidness", Error);

  const GridSpace m(9, 9, Mode::marked_infinity);
  CHECK(is_solid(m, m.rect(3, 3, 5, 5, Role::compact)));
  const Region ring{m.rect(2, 2, 6, 6, Role::compact).cells - m.rect(3, 3, 5, 5, Role::compact).cells,
                    Role::compact};
  CHECK_FALSE(is_solid(m, ring));
  const auto h = holes(m, ring);
  REQUIRE(h.size() == 1);
  CHECK(h[0].size() == 9);
  CHECK(h[0].role == Role::open);
  CHECK(is_precompact(m, h[0]));
}

TEST_CASE("solidness on every 4x4 region matches the oracle") {
  const GridSpace s(4, 4, Mode::compact);
  const auto blk = oracle::make_block(false);
  std::size_t solid = 0;
  for (Mask m = 1; m <= oracle::kAll; ++m) {
    for (Role role : {Role::compact, Role::open}) {
      const auto& own = role == Role::compact ? blk.n8 : blk.n4;
      const auto& dual = role == Role::compact ? blk.n4 : blk.n8;
      const bool expect = oracle::connected(own, m) && oracle::connected(dual, oracle::kAll & ~m);
      const Region r = oracle::region(s, m, role);
      const bool got = is_solid(s, r);
      if (got != expect) FAIL_CHECK("mask " << m << " role " << role_name(role));
      solid += got;
      // A solid set with nonempty complement has a solid complement.
      if (got && m != oracle::kAll) CHECK(is_solid(s, complement(s, r)));
    }
  }
  CHECK(solid > 0);
}

TEST_CASE("marked-infinity solidness on a 6x6 grid matches the oracle") {
  const GridSpace s(6, 6, Mode::marked_infinity);
  const auto blk = oracle::make_block(true);
  const Mask frame = oracle::kAll & ~oracle::precompact_cells(blk);
  for (Mask m = 1; m <= oracle::kAll; ++m)
    for (Role role : {Role::compact, Role::open}) {
      const auto& own = role == Role::compact ? blk.n8 : blk.n4;
      const auto& dual = role == Role::compact ? blk.n4 : blk.n8;
      bool expect = oracle::connected(own, m);
      for (Mask c : oracle::split(dual, oracle::kAll & ~m)) expect = expect && (c & frame);
      if (is_solid(s, oracle::region(s, m, role, 1)) != expect) FAIL_CHECK("mask " << m << " role " << role_name(role));
    }
}

TEST_CASE("complement and precompactness") {
  const GridSpace s(9, 9, Mode::compact);
  const Region block = s.rect(3, 3, 5, 5, Role::compact);
  const Region c = complement(s, block);
  CHECK(c.size() == 72);
  CHECK(c.role == Role::open);
  CHECK(complement(s, c) == block);
  CHECK(complement(s, s.full(Role::compact)) == s.empty(Role::open));
  CHECK_THROWS_WITH_AS(is_precompact(s, block), "all sets precompact in compact mode", Error);

  const GridSpace m(10, 10, Mode::marked_infinity);
  CHECK(is_precompact(m, m.rect(4, 4, 5, 5, Role::compact)));
  CHECK_FALSE(is_precompact(m, m.rect(1, 4, 2, 5, Role::compact)));
  Region on_ring = m.empty(Role::compact);
  on_ring.cells.set(m.index(0, 5));
  CHECK_THROWS_AS(m.require_admissible(on_ring), Error);
}

TEST_CASE("complement is an involution on random regions") {
  const GridSpace s(12, 9, Mode::marked_infinity);
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const Region r = random_cells(s, rng.coin() ? Role::compact : Role::open, rng, rng.uniform());
    const Region c = complement(s, r);
    CHECK(complement(s, c) == r);
    CHECK(c.size() + r.size() == s.interior_count());
    CHECK_FALSE(c.cells.intersects(r.cells));
  }
}

TEST_CASE("random generators produce what they promise") {
  for (Mode mode : {Mode::compact, Mode::marked_infinity}) {
    const GridSpace s(10, 8, mode);
    Rng rng(17);
    for (int t = 0; t < 300; ++t) {
      const Role role = t % 2 ? Role::open : Role::compact;
      const Region c = random_connected(s, role, rng, random_size(s, rng));
      CHECK(s.admissible(c));
      CHECK(components(s, c).size() == 1);
      const Region solid = random_solid(s, role, rng, random_size(s, rng));
      CHECK(is_solid(s, solid));
      CHECK(is_solid(s, fill_to_solid(s, c)));
      CHECK(c.cells.subset_of(fill_to_solid(s, c).cells));
    }
  }
}
