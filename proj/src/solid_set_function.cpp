#include "qm/solid_set_function.hpp"

#include <algorithm>
#include <cmath>

#include "qm/error.hpp"
#include "qm/random.hpp"
#include "qm/sampling.hpp"

namespace qm {

namespace {

double tolerance(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

std::string cell_name(const GridSpace& s, std::size_t c) {
  return "(" + std::to_string(s.x_of(c)) + "," + std::to_string(s.y_of(c)) + ")";
}

}  // namespace

SolidSetFunction::SolidSetFunction(GridSpace space, Valuation valuation, std::string name)
    : space_(std::move(space)), valuation_(std::move(valuation)), name_(std::move(name)) {}

double SolidSetFunction::total() const {
  auto v = valuate(space_.full(Role::compact));
  require(v.has_value(), "valuation gap on the whole space");
  return *v;
}

SolidSetFunction make_point_mass_seed(const GridSpace& space, std::size_t cell) {
  require(cell < space.cell_count() && space.admissible(cell), "point must be an admissible cell");
  return SolidSetFunction(
      space, [cell](const Region& r) -> std::optional<double> { return r.cells.test(cell) ? 1.0 : 0.0; },
      "point_mass" + cell_name(space, cell));
}

SolidSetFunction make_point_config(const GridSpace& space, const std::vector<std::size_t>& points) {
  require(points.size() >= 3, "point configuration needs at least 3 points");
  require(points.size() % 2 == 1, "point configuration needs an odd number of points");
  CellSet p(space.cell_count());
  for (auto c : points) {
    require(c < space.cell_count() && space.admissible(c), "configuration point must be admissible");
    require(!p.test(c), "configuration points must be distinct");
    p.set(c);
  }
  const double n = static_cast<double>((points.size() - 1) / 2);
  return SolidSetFunction(
      space,
      [p, n](const Region& r) -> std::optional<double> {
        const auto hits = (r.cells & p).count();
        return static_cast<double>(hits / 2) / n;
      },
      "points_2n1");
}

SolidSetFunction make_weighted_two_point(const GridSpace& space, std::size_t p1, std::size_t p2, double cell_area) {
  require(space.mode() == Mode::marked_infinity, "weighted two-point seed needs a marked-infinity grid");
  require(p1 != p2, "the two points must differ");
  require(space.admissible(p1) && space.admissible(p2), "points must be admissible cells");
  require(cell_area > 0, "cell area must be positive");
  return SolidSetFunction(
      space,
      [p1, p2, cell_area](const Region& r) -> std::optional<double> {
        const int hits = (r.cells.test(p1) ? 1 : 0) + (r.cells.test(p2) ? 1 : 0);
        return hits * static_cast<double>(r.cells.count()) * cell_area;
      },
      "two_point_weighted");
}

CellSet boundary_cells(const GridSpace& space) {
  CellSet b(space.cell_count());
  for (auto c : space.interior().indices()) {
    const int x = space.x_of(c), y = space.y_of(c);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (!space.admissible(x + dx, y + dy)) b.set(c);
  }
  return b;
}

SolidSetFunction make_aarnes_circle(const GridSpace& space, std::size_t p) {
  require(space.mode() == Mode::compact, "Aarnes circle needs a compact grid");
  require(p < space.cell_count() && space.admissible(p), "p must be an admissible cell");
  const CellSet b = boundary_cells(space);
  require(!b.test(p), "p lies on the boundary");
  return SolidSetFunction(
      space,
      [b, p](const Region& r) -> std::optional<double> {
        if (b.subset_of(r.cells)) return 1.0;
        return r.cells.test(p) && r.cells.intersects(b) ? 1.0 : 0.0;
      },
      "aarnes_circle");
}

TopoMeasure make_diffuse_dtm(const GridSpace& space, const CellSet& d) {
  require(d.size() == space.cell_count() && d.subset_of(space.interior()), "D must be admissible");
  require(d.count() >= 2, "D needs at least two cells");
  require(is_connected(space, d, Adjacency::eight), "D must be connected");
  const Region dr{d, Role::compact};
  return TopoMeasure(
      space, MeasureKind::deficient,
      [space, dr](const Region& r) { return realized_subset(space, dr, r) ? 1.0 : 0.0; }, "diffuse_dtm");
}

namespace {

class ExtensionEvaluator {
 public:
  explicit ExtensionEvaluator(SolidSetFunction lambda) : lambda_(std::move(lambda)) {}

  double operator()(const Region& r) const {
    double sum = 0;
    for (const auto& c : components(lambda_.space(), r)) sum += connected_value(c);
    return sum;
  }

 private:
  double solid_value(const Region& r) const {
    auto v = lambda_.valuate(r);
    if (!v) throw Error("valuation gap at region " + r.cells.to_rle());
    return *v;
  }

  double solid_piece(const Region& r) const {
    if (!is_solid(lambda_.space(), r)) throw Error("extension inconsistency at region " + r.cells.to_rle());
    return solid_value(r);
  }

  double connected_value(const Region& c) const {
    const GridSpace& s = lambda_.space();
    if (is_solid(s, c)) return solid_value(c);
    if (s.mode() == Mode::compact) {
      double v = solid_value(s.full(c.role));
      for (const auto& d : complement_components(s, c)) v -= solid_piece(d);
      return v;
    }
    Region hull = c;
    const auto hs = holes(s, c);
    for (const auto& h : hs) hull.cells |= h.cells;
    double v = solid_piece(hull);
    for (const auto& h : hs) v -= solid_piece(h);
    return v;
  }

  SolidSetFunction lambda_;
};

}  // namespace

TopoMeasure extend(const SolidSetFunction& lambda) {
  return TopoMeasure(lambda.space(), MeasureKind::topological, ExtensionEvaluator(lambda), lambda.name(), true);
}

namespace {

bool compact_ok(const GridSpace& s, const Region& r) {
  return r.role == Role::open || r.empty() || s.mode() == Mode::compact || is_precompact(s, r);
}

}  // namespace

CheckReport check_ssf_axioms(const SolidSetFunction& lambda, std::size_t budget, std::uint64_t seed) {
  require(budget >= 1, "budget must be at least 1");
  const GridSpace& s = lambda.space();
  Rng rng(derive_seed(seed, stream_id("ssf_axioms")));
  CheckReport rep;
  auto val = [&](const Region& r) {
    auto v = lambda.valuate(r);
    if (!v) throw Error("valuation gap at region " + r.cells.to_rle());
    return *v;
  };
  const double total = val(s.full(Role::compact));
  const double tol = tolerance(total);
  if (std::abs(val(s.full(Role::open)) - total) > tol) {
    rep.fail("(s3) whole space", {s.full(Role::compact), s.full(Role::open)}, {total, val(s.full(Role::open))});
    return rep;
  }
  for (std::size_t t = 0; t < budget; ++t) {
    const Role role = rng.coin() ? Role::compact : Role::open;
    const Region a = random_solid(s, role, rng, random_size(s, rng));
    const double va = val(a);
    if (!std::isfinite(va) || va < -tol) {
      rep.fail("nonnegativity", {a}, {va});
      return rep;
    }
    if (s.mode() == Mode::compact && a.cells != s.interior()) {
      const Region c = complement(s, a);
      if (is_solid(s, c)) {
        const double vc = val(c);
        if (std::abs(va + vc - total) > tol) {
          rep.fail("(s4) partition additivity", {a, c}, {va, vc, total}, "lambda(A) + lambda(X\\A) != lambda(X)");
          return rep;
        }
      }
    }
    const Region other{a.cells, flip(role)};
    if (is_solid(s, other) && compact_ok(s, a) && compact_ok(s, other)) {
      const double vo = val(other);
      if (std::abs(vo - va) > tol) {
        rep.fail(role == Role::open ? "(s2) inner regularity" : "(s3) outer regularity", {a, other}, {va, vo},
                 "same cells, different role, different value");
        return rep;
      }
    }
    if (role == Role::open) {
      // Largest compact solid piece of the one-cell erosion lies inside A.
      auto parts = components(s, closed_interior(s, a.cells), Adjacency::eight);
      if (!parts.empty()) {
        auto best = std::max_element(parts.begin(), parts.end(),
                                     [](const CellSet& x, const CellSet& y) { return x.count() < y.count(); });
        const Region k{*best, Role::compact};
        if (is_solid(s, k) && compact_ok(s, k)) {
          const double vk = val(k);
          if (vk > va + tol) {
            rep.fail("(s2) inner regularity", {k, a}, {vk, va}, "compact inside open has larger value");
            return rep;
          }
        }
      }
    } else if (compact_ok(s, a)) {
      const Region v{dilate(s, a.cells, Adjacency::eight), Role::open};
      if (is_solid(s, v)) {
        const double vv = val(v);
        if (vv < va - tol) {
          rep.fail("(s3) outer regularity", {a, v}, {va, vv}, "open around compact has smaller value");
          return rep;
        }
      }
      // (s1): separated compact solid pieces inside A.
      std::vector<Region> pieces;
      CellSet used(s.cell_count());
      const int want = 2 + static_cast<int>(rng.below(3));
      for (int k = 0; k < want * 3 && static_cast<int>(pieces.size()) < want; ++k) {
        const CellSet avail = a.cells - dilate(s, used, Adjacency::eight);
        Region piece = random_connected_within(s, avail, Role::compact, rng, 1 + rng.below(a.size()));
        if (piece.empty()) break;
        piece = fill_to_solid(s, piece);
        if (!piece.cells.subset_of(avail) || !is_solid(s, piece) || !compact_ok(s, piece)) continue;
        used |= piece.cells;
        pieces.push_back(piece);
      }
      double sum = 0;
      std::vector<double> vals;
      for (const auto& p : pieces) {
        vals.push_back(val(p));
        sum += vals.back();
      }
      if (sum > va + tol) {
        pieces.push_back(a);
        vals.push_back(va);
        rep.fail("(s1) superadditivity", pieces, vals, "sum over disjoint pieces exceeds container");
        return rep;
      }
    }
    ++rep.checked;
  }
  if (s.mode() == Mode::marked_infinity) rep.detail = "(s4) vacuous in marked-infinity mode";
  return rep;
}

bool tm1_admissible(const GridSpace& space, const Region& a, const Region& b, Role union_role) {
  if (!disjoint_union_is(space, a, b, union_role)) return false;
  if (space.mode() == Mode::compact) return true;
  const Region u{a.cells | b.cells, union_role};
  return compact_ok(space, a) && compact_ok(space, b) && compact_ok(space, u);
}

namespace {

AdmissiblePair sample_tm1_pair(const GridSpace& s, Rng& rng, bool compact_only) {
  const CellSet compact_cells = s.mode() == Mode::compact ? s.interior() : s.interior() - s.frame();
  const int strategy = compact_only ? 0 : static_cast<int>(rng.below(6));
  auto blob = [&](Role role) {
    const CellSet& mask = role == Role::compact ? compact_cells : s.interior();
    Region r = s.empty(role);
    const int n = 1 + static_cast<int>(rng.below(2));
    for (int k = 0; k < n; ++k) r.cells |= random_connected_within(s, mask, role, rng, random_size(s, rng)).cells;
    return r;
  };
  switch (strategy) {
    case 0: {
      Region a = blob(Role::compact), b = blob(Role::compact);
      b.cells -= dilate(s, a.cells, Adjacency::eight);
      return {a, b, Role::compact};
    }
    case 1: {
      Region a = blob(Role::open), b = blob(Role::open);
      b.cells -= dilate(s, a.cells, Adjacency::four);
      return {a, b, Role::open};
    }
    case 2: {
      Region u = rng.coin() ? random_solid(s, Role::compact, rng, random_size(s, rng)) : blob(Role::compact);
      u.cells &= compact_cells;
      Region b = random_connected_within(s, closed_interior(s, u.cells), Role::open, rng, random_size(s, rng));
      Region a{u.cells - b.cells, Role::compact};
      return {a, b, Role::compact};
    }
    case 3: {
      Region v = rng.coin() ? random_solid(s, Role::open, rng, random_size(s, rng)) : blob(Role::open);
      Region a = random_connected_within(s, closed_interior(s, v.cells) & compact_cells, Role::compact, rng,
                                         random_size(s, rng));
      Region b{v.cells - a.cells, Role::open};
      return {a, b, Role::open};
    }
    case 4: {
      Region a = random_solid(s, Role::compact, rng, random_size(s, rng));
      return {a, complement(s, a), rng.coin() ? Role::compact : Role::open};
    }
    default: {
      Region a = random_cells(s, rng.coin() ? Role::compact : Role::open, rng, rng.uniform(0.1, 0.6));
      Region b = random_cells(s, rng.coin() ? Role::compact : Role::open, rng, rng.uniform(0.1, 0.6));
      b.cells -= a.cells;
      return {a, b, rng.coin() ? Role::compact : Role::open};
    }
  }
}

}  // namespace

std::optional<AdmissiblePair> sample_admissible_pair(const GridSpace& space, Rng& rng, bool compact_only, int tries) {
  for (int t = 0; t < tries; ++t) {
    auto c = sample_tm1_pair(space, rng, compact_only);
    if (!c.a.empty() && !c.b.empty() && tm1_admissible(space, c.a, c.b, c.union_role)) return c;
  }
  return std::nullopt;
}

CheckReport check_tm1_sampled(const TopoMeasure& mu, std::size_t budget, std::uint64_t seed) {
  const GridSpace& s = mu.space();
  Rng rng(derive_seed(seed, stream_id("tm1")));
  const bool compact_only = mu.kind() == MeasureKind::deficient;
  CheckReport rep;
  const double tol = tolerance(mu.total_mass());
  for (std::size_t t = 0; t < budget * 4 && rep.checked < budget; ++t) {
    auto c = sample_tm1_pair(s, rng, compact_only);
    if (c.a.empty() || c.b.empty() || !tm1_admissible(s, c.a, c.b, c.union_role)) continue;
    const Region u{c.a.cells | c.b.cells, c.union_role};
    const double va = mu(c.a), vb = mu(c.b), vu = mu(u);
    ++rep.checked;
    if (std::abs(va + vb - vu) > tol) {
      rep.fail("TM1 additivity", {c.a, c.b, u}, {va, vb, vu});
      return rep;
    }
  }
  return rep;
}

CheckReport check_superadditivity(const TopoMeasure& mu, std::size_t budget, std::uint64_t seed) {
  const GridSpace& s = mu.space();
  Rng rng(derive_seed(seed, stream_id("superadditivity")));
  CheckReport rep;
  const double tol = tolerance(mu.total_mass());
  const bool compact_pieces_only = mu.kind() == MeasureKind::deficient;
  for (std::size_t t = 0; t < budget; ++t) {
    const Role role = rng.coin() ? Role::compact : Role::open;
    Region a = rng.coin() ? random_solid(s, role, rng, random_size(s, rng))
                          : random_blobs(s, role, rng, 1 + static_cast<int>(rng.below(3)), random_size(s, rng));
    if (!compact_ok(s, a)) a.role = Role::open;
    std::vector<Region> pieces;
    CellSet used(s.cell_count()), used_compact(s.cell_count());
    bool had_noncompact = false;
    const int want = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < want * 3 && static_cast<int>(pieces.size()) < want; ++k) {
      const Role pr = (compact_pieces_only || rng.coin()) ? Role::compact : Role::open;
      CellSet avail = a.cells - used;
      if (pr == Role::compact) avail -= dilate(s, used_compact, Adjacency::eight);
      Region p = random_connected_within(s, avail, pr, rng, 1 + rng.below(std::max<std::size_t>(1, a.size())));
      if (p.empty() || !realized_subset(s, p, a)) continue;
      if (pr == Role::compact && !compact_ok(s, p)) {
        if (had_noncompact) continue;
        had_noncompact = true;
      }
      used |= p.cells;
      if (pr == Role::compact) used_compact |= p.cells;
      pieces.push_back(p);
    }
    if (pieces.empty()) continue;
    double sum = 0;
    std::vector<double> vals;
    for (const auto& p : pieces) {
      vals.push_back(mu(p));
      sum += vals.back();
    }
    const double va = mu(a);
    ++rep.checked;
    if (sum > va + tol) {
      pieces.push_back(a);
      vals.push_back(va);
      rep.fail("superadditivity", pieces, vals);
      return rep;
    }
  }
  return rep;
}

CheckReport check_measure_criteria(const TopoMeasure& mu, std::size_t budget, std::uint64_t seed,
                                   const std::vector<std::pair<Region, Region>>& probe_pairs) {
  const GridSpace& s = mu.space();
  Rng rng(derive_seed(seed, stream_id("measure_criteria")));
  CheckReport rep;
  const double total = mu.total_mass();
  const double tol = tolerance(total);
  auto test_pair = [&](const Region& a, const Region& b) {
    if (a.role != b.role || a.empty() || b.empty()) return false;
    if (!compact_ok(s, a) || !compact_ok(s, b)) return false;
    const Region u{a.cells | b.cells, a.role};
    const double va = mu(a), vb = mu(b), vu = mu(u);
    ++rep.checked;
    if (vu <= va + vb + tol) return false;
    std::vector<Region> w{a, b};
    std::vector<double> vals{va, vb, vu};
    std::string why = "mu(A u B) > mu(A) + mu(B)";
    if (a.role == Role::compact && u.cells != s.interior()) {
      const Region rest = complement(s, u);
      const double vr = mu(rest);
      if (va + vb + vr < total - tol) {
        w.push_back(rest);
        vals.push_back(vr);
        vals.push_back(total);
        why = "cover A, B, X\\(A u B) has total value below mu(X)";
      }
    }
    rep.fail("subadditivity", w, vals, why);
    return true;
  };
  for (const auto& [a, b] : probe_pairs)
    if (test_pair(a, b)) return rep;
  const CellSet rim = boundary_cells(s);
  const double span = std::min(s.width(), s.height()) * s.cell_size();
  for (std::size_t t = 0; t < budget; ++t) {
    const Role role = rng.coin() ? Role::compact : Role::open;
    Region a = s.empty(role), b = s.empty(role);
    switch (rng.below(3)) {
      case 0:
        a = random_solid(s, role, rng, random_size(s, rng));
        b = random_solid(s, role, rng, random_size(s, rng));
        break;
      case 1: {
        const auto cells = s.interior().indices();
        a = s.ball(s.center(cells[rng.below(cells.size())]), rng.uniform(0.5, 0.5 * span), role);
        b = s.ball(s.center(cells[rng.below(cells.size())]), rng.uniform(0.5, 0.5 * span), role);
        break;
      }
      default: {
        CellSet whole;
        switch (rng.below(3)) {
          case 0:
            whole = random_solid(s, role, rng, random_size(s, rng)).cells;
            break;
          case 1:
            whole = s.interior();
            break;
          default:
            whole = rim;
        }
        const CellSet h = random_half_plane(s, rng);
        a.cells = whole & h;
        b.cells = whole - h;
      }
    }
    if (test_pair(a, b)) return rep;
  }
  return rep;
}

}  // namespace qm
