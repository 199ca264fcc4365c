#include "qm/image_transform.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "qm/error.hpp"
#include "qm/quasi_integral.hpp"
#include "qm/random.hpp"
#include "qm/sampling.hpp"
#include "qm/solid_set_function.hpp"

namespace qm {

struct ImageTransform::State {
  GridSpace source, target;
  Map map;
  std::string descriptor;
  bool preserves_measures = false;
  mutable std::mutex mutex;
  mutable std::unordered_map<Region, Region, RegionHash> cache;
};

namespace {
constexpr std::size_t kCacheCap = 1 << 16;
}

ImageTransform::ImageTransform(GridSpace source, GridSpace target, Map map, std::string descriptor,
                               bool preserves_measures)
    : state_(std::make_shared<State>()) {
  state_->source = std::move(source);
  state_->target = std::move(target);
  state_->map = std::move(map);
  state_->descriptor = std::move(descriptor);
  state_->preserves_measures = preserves_measures;
}

const GridSpace& ImageTransform::source() const { return state_->source; }
const GridSpace& ImageTransform::target() const { return state_->target; }
const std::string& ImageTransform::descriptor() const { return state_->descriptor; }
bool ImageTransform::preserves_measures() const { return state_->preserves_measures; }

Region ImageTransform::operator()(const Region& a) const {
  require(static_cast<bool>(state_), "image transformation is not initialized");
  state_->source.require_admissible(a);
  {
    std::lock_guard<std::mutex> lock(state_->mutex);
    auto it = state_->cache.find(a);
    if (it != state_->cache.end()) return it->second;
  }
  Region img = state_->map(a);
  require(img.role == a.role, "image transformation changed the role of a region");
  state_->target.require_admissible(img);
  std::lock_guard<std::mutex> lock(state_->mutex);
  if (state_->cache.size() >= kCacheCap) state_->cache.clear();
  state_->cache.emplace(a, img);
  return img;
}

ImageTransform from_proper_map(const GridSpace& source, const GridSpace& target, const CellMap& u,
                               std::string descriptor) {
  require(u.size() == target.cell_count(), "cell map must have one entry per target cell");
  for (auto y : target.interior().indices())
    require(u[y] < source.cell_count() && source.admissible(u[y]), "cell map leaves the admissible source cells");
  if (target.mode() == Mode::marked_infinity) {
    require(source.mode() == Mode::marked_infinity, "a map from a noncompact space into a compact one is not proper");
    for (auto y : target.frame().indices())
      require(source.frame().test(u[y]), "map is not proper: a frame cell lands away from the source frame");
  }
  auto map = std::make_shared<CellMap>(u);
  const GridSpace t = target;
  return ImageTransform(
      source, target,
      [map, t](const Region& a) {
        Region r = t.empty(a.role);
        for (auto y : t.interior().indices())
          if (a.cells.test((*map)[y])) r.cells.set(y);
        return r;
      },
      std::move(descriptor), true);
}

CellMap identity_map(const GridSpace& space) {
  CellMap u(space.cell_count());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = i;
  return u;
}

CellMap constant_map(const GridSpace& target, std::size_t source_cell) {
  return CellMap(target.cell_count(), source_cell);
}

CellMap grid_isometry(const GridSpace& space, int k) {
  require(space.width() == space.height(), "grid isometries need a square grid");
  require(k >= 0 && k < 8, "isometry index must be in 0..7");
  const int n = space.width();
  CellMap u(space.cell_count());
  for (std::size_t i = 0; i < u.size(); ++i) {
    int x = space.x_of(i), y = space.y_of(i);
    for (int r = 0; r < k % 4; ++r) {
      const int nx = n - 1 - y, ny = x;
      x = nx;
      y = ny;
    }
    if (k >= 4) x = n - 1 - x;
    u[i] = space.index(x, y);
  }
  for (auto c : space.interior().indices())
    require(space.admissible(u[c]), "grid isometry does not preserve the admissible cells");
  return u;
}

ImageTransform constant_from_simple(const TopoMeasure& simple, const GridSpace& target) {
  require(target.mode() == Mode::compact, "constant transformation needs a compact target");
  const GridSpace& s = simple.space();
  auto is01 = [](double v) { return v == 0.0 || v == 1.0; };
  require(simple.total_mass() == 1.0, "measure is not simple: total mass differs from 1");
  Rng rng(derive_seed(0x5eed, stream_id("simple_check")));
  for (int t = 0; t < 200; ++t) {
    const Role role = rng.coin() ? Role::compact : Role::open;
    const Region r = t % 2 ? random_blobs(s, role, rng, 1 + static_cast<int>(rng.below(3)), random_size(s, rng))
                           : random_solid(s, role, rng, random_size(s, rng));
    require(is01(simple(r)), "measure is not simple: value " + std::to_string(simple(r)) + " on a sampled region");
  }
  return ImageTransform(
      s, target,
      [simple, target](const Region& a) {
        const double v = simple(a);
        require(v == 0.0 || v == 1.0, "measure is not simple on region " + a.cells.to_rle());
        return v == 1.0 ? target.full(a.role) : target.empty(a.role);
      },
      "constant_simple(" + simple.name() + ")");
}

namespace {

class SolidExtension {
 public:
  SolidExtension(GridSpace source, GridSpace target, ImageTransform::Map q0)
      : source_(std::move(source)), target_(std::move(target)), q0_(std::move(q0)) {}

  Region operator()(const Region& r) const {
    Region out = target_.empty(r.role);
    for (const auto& c : components(source_, r)) {
      const Region img = connected(c);
      if (img.cells.intersects(out.cells))
        throw Error("extension inconsistency: component images overlap at region " + c.cells.to_rle());
      out.cells |= img.cells;
    }
    return out;
  }

 private:
  Region solid_image(const Region& r) const {
    Region img = q0_(r);
    require(img.role == r.role, "solid map changed the role of region " + r.cells.to_rle());
    target_.require_admissible(img);
    return img;
  }

  Region solid_piece(const Region& r) const {
    if (!is_solid(source_, r)) throw Error("extension inconsistency: non-solid piece " + r.cells.to_rle());
    return solid_image(r);
  }

  Region carve(Region container, const std::vector<Region>& pieces, const Region& where) const {
    for (const auto& p : pieces) {
      const Region img = solid_piece(p);
      if (!img.cells.subset_of(container.cells))
        throw Error("extension inconsistency: image of " + p.cells.to_rle() + " leaves its container at region " +
                    where.cells.to_rle());
      container.cells -= img.cells;
    }
    return container;
  }

  Region connected(const Region& c) const {
    if (is_solid(source_, c)) return solid_image(c);
    if (source_.mode() == Mode::compact) {
      Region whole = solid_image(source_.full(c.role));
      return carve(whole, complement_components(source_, c), c);
    }
    Region hull = c;
    const auto hs = holes(source_, c);
    for (const auto& h : hs) hull.cells |= h.cells;
    return carve(solid_piece(hull), hs, c);
  }

  GridSpace source_, target_;
  ImageTransform::Map q0_;
};

}  // namespace

ImageTransform extend_solid_q(const GridSpace& source, const GridSpace& target, ImageTransform::Map q0,
                              std::string descriptor) {
  return ImageTransform(source, target, SolidExtension(source, target, std::move(q0)), std::move(descriptor));
}

ImageTransform two_point_hull(const GridSpace& space, std::size_t x, std::size_t z) {
  require(space.mode() == Mode::compact, "two-point hull needs a compact grid");
  require(x != z, "the two points must differ");
  require(space.admissible(x) && space.admissible(z), "points must be admissible cells");
  return extend_solid_q(
      space, space,
      [space, x, z](const Region& a) {
        const int hits = (a.cells.test(x) ? 1 : 0) + (a.cells.test(z) ? 1 : 0);
        if (hits == 0) return space.empty(a.role);
        if (hits == 1) return a;
        return space.full(a.role);
      },
      "two_point_hull");
}

ImageTransform compose(const ImageTransform& p, const ImageTransform& q) {
  require(q.target() == p.source(), "compose: target of the inner map must be the source of the outer map");
  return ImageTransform(
      q.source(), p.target(), [p, q](const Region& a) { return p(q(a)); },
      "compose(" + p.descriptor() + "," + q.descriptor() + ")", p.preserves_measures() && q.preserves_measures());
}

ImageTransform with_cell_removed(const ImageTransform& q, std::size_t cell) {
  return ImageTransform(
      q.source(), q.target(),
      [q, cell](const Region& a) {
        Region r = q(a);
        if (cell < r.cells.size()) r.cells.reset(cell);
        return r;
      },
      "corrupted(" + q.descriptor() + ")");
}

TopoMeasure adjoint(const ImageTransform& q, const TopoMeasure& nu) {
  require(nu.space() == q.target(), "adjoint: measure lives on a different space than the target");
  MeasureKind kind = nu.kind();
  if (kind == MeasureKind::measure && !q.preserves_measures()) kind = MeasureKind::topological;
  return TopoMeasure(
      q.source(), kind, [q, nu](const Region& a) { return nu(q(a)); }, "adjoint(" + nu.name() + ")");
}

double adjoint_eval(const ImageTransform& q, const TopoMeasure& nu, const Region& a) {
  require(nu.space() == q.target(), "adjoint: measure lives on a different space than the target");
  return nu(q(a));
}

double theta_eval(const ImageTransform& q, const GridFunction& f, std::size_t y) {
  return quasi_integral(adjoint(q, point_mass(q.target(), y)), f);
}

GridFunction theta(const ImageTransform& q, const GridFunction& f) {
  GridFunction out(q.target().cell_count());
  for (auto y : q.target().interior().indices()) out[y] = theta_eval(q, f, y);
  return out;
}

namespace {

// Regions with the given cells in one-cell steps, in BFS order from a
// random start (so every prefix stays close to connected).
std::vector<std::size_t> chain_order(const GridSpace& s, const CellSet& cells, Rng& rng) {
  std::vector<std::size_t> order;
  CellSet left = cells;
  while (left.any()) {
    const auto idx = left.indices();
    std::vector<std::size_t> queue{idx[rng.below(idx.size())]};
    left.reset(queue.front());
    for (std::size_t h = 0; h < queue.size(); ++h) {
      order.push_back(queue[h]);
      for (auto n : s.neighbors(queue[h], Adjacency::eight))
        if (left.test(n)) {
          left.reset(n);
          queue.push_back(n);
        }
    }
  }
  return order;
}

// Cells whose split into components, and whose complement's split, does not
// depend on the adjacency. Only there do the two role readings of the same
// cells describe the same configuration, so only there the chain limits are
// compared with q.
bool role_stable(const GridSpace& s, const CellSet& cells) {
  const CellSet rest = s.interior() - cells;
  return components(s, cells, Adjacency::eight).size() == components(s, cells, Adjacency::four).size() &&
         components(s, rest, Adjacency::eight).size() == components(s, rest, Adjacency::four).size();
}

}  // namespace

CheckReport check_it_axioms(const ImageTransform& q, std::size_t budget, std::uint64_t seed) {
  const GridSpace& s = q.source();
  const GridSpace& t = q.target();
  Rng rng(derive_seed(seed, stream_id("it_axioms")));
  CheckReport rep;
  for (Role role : {Role::compact, Role::open}) {
    const Region e = q(s.empty(role));
    if (!e.empty()) {
      rep.fail("q(empty) = empty", {s.empty(role), e}, {});
      return rep;
    }
  }
  for (std::size_t k = 0; k < budget; ++k) {
    const Role role = rng.coin() ? Role::compact : Role::open;
    // (IT1): roles and admissibility are enforced by operator(); surface the
    // failure as a report instead of an exception.
    const Region a = rng.coin() ? random_solid(s, role, rng, random_size(s, rng))
                                : random_blobs(s, role, rng, 1 + static_cast<int>(rng.below(3)), random_size(s, rng));
    Region qa;
    try {
      qa = q(a);
    } catch (const Error& err) {
      rep.fail("(IT1) role preservation", {a}, {}, err.what());
      return rep;
    }
    // Monotonicity on a nested pair with the same role.
    Region sub = random_connected_within(s, a.cells, role, rng, 1 + rng.below(a.size()));
    if (!sub.empty() && !q(sub).cells.subset_of(qa.cells)) {
      rep.fail("monotonicity", {sub, a, q(sub), qa}, {});
      return rep;
    }
    // (IT2): disjoint additivity with admissible images.
    if (auto pair = sample_admissible_pair(s, rng, false)) {
      const Region u{pair->a.cells | pair->b.cells, pair->union_role};
      const Region ia = q(pair->a), ib = q(pair->b), iu = q(u);
      const bool same_cells = iu.cells == (ia.cells | ib.cells);
      if (!same_cells || ia.cells.intersects(ib.cells) || !disjoint_union_is(t, ia, ib, pair->union_role)) {
        rep.fail("(IT2) disjoint additivity", {pair->a, pair->b, ia, ib, iu}, {},
                 same_cells ? "images are not an admissible disjoint union" : "image of union differs");
        return rep;
      }
    }
    // (IT3)/(IT4): one-cell chains through the same cells with the other role.
    const auto order = chain_order(s, a.cells, rng);
    const bool stable = role_stable(s, a.cells);
    if (role == Role::open) {
      Region k = s.empty(Role::compact);
      CellSet acc(t.cell_count());
      for (auto c : order) {
        k.cells.set(c);
        const Region qk = q(k);
        if (!acc.subset_of(qk.cells)) {
          rep.fail("(IT3) increasing chain not monotone", {k, qk}, {});
          return rep;
        }
        acc = qk.cells;
      }
      if (stable && acc != qa.cells) {
        rep.fail("(IT3) inner regularity", {a, Region{acc, Role::open}, qa}, {});
        return rep;
      }
    } else {
      Region v{dilate(s, a.cells, Adjacency::eight), Role::open};
      CellSet acc = q(v).cells;
      std::vector<std::size_t> extra = (v.cells - a.cells).indices();
      for (std::size_t i = extra.size(); i > 1; --i) std::swap(extra[i - 1], extra[rng.below(i)]);
      for (auto c : extra) {
        v.cells.reset(c);
        const Region qv = q(v);
        if (!qv.cells.subset_of(acc)) {
          rep.fail("(IT4) decreasing chain not monotone", {v, qv}, {});
          return rep;
        }
        acc = qv.cells;
      }
      if (stable && acc != qa.cells) {
        rep.fail("(IT4) outer regularity", {a, Region{acc, Role::compact}, qa}, {});
        return rep;
      }
    }
    ++rep.checked;
  }
  const Region whole = q(s.full(Role::compact));
  if (whole.cells != t.interior()) rep.detail = "q(X) is not the whole target";
  return rep;
}

}  // namespace qm
