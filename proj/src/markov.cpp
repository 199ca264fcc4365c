#include "qm/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "qm/error.hpp"
#include "qm/parallel.hpp"
#include "qm/random.hpp"
#include "qm/sampling.hpp"

namespace qm {

double AffineMap::factor() const {
  // Largest singular value of [[a, b], [c, d]].
  const double p = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, p * p / 4 - det * det));
  return std::sqrt(p / 2 + disc);
}

std::optional<Point> AffineMap::fixed_point() const {
  const double m11 = 1 - a, m12 = -b, m21 = -c, m22 = 1 - d;
  const double det = m11 * m22 - m12 * m21;
  if (std::abs(det) < 1e-15) return std::nullopt;
  return Point{(e * m22 - m12 * f) / det, (m11 * f - m21 * e) / det};
}

double TransformSystem::alpha_sum() const { return std::accumulate(alphas.begin(), alphas.end(), 0.0); }

double TransformSystem::contraction_factor() const {
  return factors.empty() ? 0.0 : *std::max_element(factors.begin(), factors.end());
}

namespace {

void check_alphas(const std::vector<double>& alphas) {
  require(!alphas.empty(), "system needs at least one term");
  double s = 0;
  for (double a : alphas) {
    require(a >= 0 && std::isfinite(a), "alphas must be nonnegative");
    s += a;
  }
  require(s <= 1 + 1e-12, "alphas sum to more than 1");
}

}  // namespace

TransformSystem make_system(std::vector<ImageTransform> transforms, std::vector<double> alphas,
                            std::vector<double> factors) {
  require(transforms.size() == alphas.size(), "one alpha per transform");
  check_alphas(alphas);
  for (const auto& q : transforms) require(q.source() == transforms.front().source() &&
                                               q.target() == transforms.front().target(),
                                           "transforms of a system must share source and target");
  if (factors.empty()) factors.assign(transforms.size(), 1.0);
  require(factors.size() == transforms.size(), "one factor per transform");
  TransformSystem s;
  s.transforms = std::move(transforms);
  s.alphas = std::move(alphas);
  s.factors = std::move(factors);
  return s;
}

TransformSystem make_system(std::vector<AffineMap> maps, std::vector<double> alphas) {
  require(maps.size() == alphas.size(), "one alpha per map");
  check_alphas(alphas);
  TransformSystem s;
  for (const auto& m : maps) s.factors.push_back(m.factor());
  s.maps = std::move(maps);
  s.alphas = std::move(alphas);
  return s;
}

TransformSystem make_system(const SystemGenerator& gen, double eps, std::size_t max_terms) {
  require(static_cast<bool>(gen.alpha) && static_cast<bool>(gen.tail), "generator needs alpha and a tail certificate");
  require(static_cast<bool>(gen.transform) != static_cast<bool>(gen.map), "generator needs exactly one backend");
  require(eps > 0, "truncation tolerance must be positive");
  std::vector<double> alphas;
  std::size_t k = 0;
  while (gen.tail(k) >= eps) {
    require(k < max_terms, "tail certificate did not drop below eps within the term limit");
    ++k;
    alphas.push_back(gen.alpha(k));
  }
  TransformSystem s;
  if (gen.transform) {
    std::vector<ImageTransform> ts;
    for (std::size_t i = 1; i <= k; ++i) ts.push_back(gen.transform(i));
    s = make_system(std::move(ts), std::move(alphas));
  } else {
    std::vector<AffineMap> ms;
    for (std::size_t i = 1; i <= k; ++i) ms.push_back(gen.map(i));
    s = make_system(std::move(ms), std::move(alphas));
  }
  s.tail_bound = gen.tail(k);
  require(s.alpha_sum() + s.tail_bound <= 1 + 1e-12, "alphas with tail sum to more than 1");
  return s;
}

TransformSystem sierpinski_system() {
  const double h = std::sqrt(3.0) / 2;
  return make_system({AffineMap::similarity(0.5, {0, 0}), AffineMap::similarity(0.5, {0.5, 0}),
                      AffineMap::similarity(0.5, {0.25, h / 2})},
                     {1.0 / 3, 1.0 / 3, 1.0 / 3});
}

struct LazyMeasure::State {
  TransformSystem system;
  TopoMeasure root;
  std::mutex mutex;
  std::vector<std::unordered_map<Region, double, RegionHash>> memo;

  double eval(int level, const Region& a) {
    if (level == 0) return root(a);
    {
      std::lock_guard<std::mutex> lock(mutex);
      auto it = memo[level].find(a);
      if (it != memo[level].end()) return it->second;
    }
    double v = 0;
    for (std::size_t i = 0; i < system.size(); ++i) v += system.alphas[i] * eval(level - 1, system.transforms[i](a));
    std::lock_guard<std::mutex> lock(mutex);
    if (memo[level].size() > (std::size_t{1} << 18)) memo[level].clear();
    memo[level].emplace(a, v);
    return v;
  }
};

LazyMeasure::LazyMeasure(TransformSystem system, TopoMeasure root, int level)
    : state_(std::make_shared<State>()), level_(level) {
  require(!system.continuous() && system.size() > 0, "lazy measures need a grid system");
  require(level >= 0, "negative level");
  require(level <= max_level, "grid iteration is capped at " + std::to_string(max_level) +
                                  " levels; use the discrete backend");
  require(root.space() == system.transforms.front().target(), "measure must live on the target of the transforms");
  if (level > 1)
    require(system.transforms.front().source() == system.transforms.front().target(),
            "iterating needs transforms from a space to itself");
  state_->system = std::move(system);
  state_->root = std::move(root);
  state_->memo.resize(max_level + 1);
}

double LazyMeasure::operator()(const Region& a) const {
  state_->system.transforms.front().source().require_admissible(a);
  if (a.empty()) return 0;
  return state_->eval(level_, a);
}

int LazyMeasure::level() const { return level_; }

LazyMeasure LazyMeasure::next() const {
  require(level_ < max_level, "grid iteration is capped at " + std::to_string(max_level) +
                                  " levels; use the discrete backend");
  LazyMeasure out = *this;
  ++out.level_;
  return out;
}

TopoMeasure LazyMeasure::measure() const {
  const auto& sys = state_->system;
  MeasureKind kind = state_->root.kind();
  if (kind == MeasureKind::measure)
    for (const auto& q : sys.transforms)
      if (!q.preserves_measures()) kind = MeasureKind::topological;
  const LazyMeasure self = *this;
  return TopoMeasure(sys.transforms.front().source(), kind, [self](const Region& a) { return self(a); },
                     "S^" + std::to_string(level_) + "(" + state_->root.name() + ")");
}

LazyMeasure apply(const TransformSystem& system, const TopoMeasure& mu) { return LazyMeasure(system, mu, 1); }

DiscreteMeasure apply_discrete(const TransformSystem& system, const DiscreteMeasure& nu, std::size_t cap) {
  require(system.continuous(), "apply_discrete needs affine maps");
  require(std::abs(nu.total() - 1) <= 1e-9, "apply_discrete needs a normalized measure");
  require(nu.size() * system.size() <= cap,
          "support would exceed " + std::to_string(cap) + " points; use chaos_game instead");
  DiscreteMeasure out;
  out.points.reserve(nu.size() * system.size());
  out.weights.reserve(nu.size() * system.size());
  for (std::size_t i = 0; i < system.size(); ++i)
    for (std::size_t k = 0; k < nu.size(); ++k) out.add(system.maps[i](nu.points[k]), system.alphas[i] * nu.weights[k]);
  return out.merged(1e-12);
}

namespace {

constexpr std::size_t kMaxPushedDiffs = std::size_t{1} << 16;

void check_trace(const std::vector<double>& trace) {
  if (trace.size() < 6) return;
  for (std::size_t k = trace.size() - 5; k < trace.size(); ++k)
    if (trace[k] < trace[k - 1]) return;
  throw Error("contraction violated: distance trace did not decrease over 5 consecutive steps");
}

}  // namespace

DiscreteFixedPoint fixed_point(const TransformSystem& system, const DiscreteMeasure& mu0, double tol,
                               std::size_t max_iter, std::size_t exact_cap) {
  require(system.continuous(), "discrete fixed point needs affine maps");
  require(system.contraction_factor() < 1, "fixed point iteration needs contracting maps");
  DiscreteFixedPoint out;
  DiscreteMeasure cur = mu0.normalized().merged(1e-12);
  out.measure = cur;
  out.level = 0;
  bool materialized = true;
  DiscreteMeasure next;
  // Difference vectors x − y of the last optimal plan, pushed through the
  // linear parts once iterates are too large for exact transport.
  std::vector<std::pair<Point, double>> diffs;
  for (std::size_t k = 0; k < max_iter; ++k) {
    double d;
    bool exact = false;
    if (materialized && cur.size() <= exact_cap && cur.size() * system.size() <= exact_cap) {
      next = apply_discrete(system, cur);
      const W1Result w = w1_discrete(cur, next);
      d = w.value;
      exact = true;
      diffs.clear();
      const DiscreteMeasure a = cur.merged(0), b = next.merged(0);
      for (const auto& p : w.plan)
        diffs.emplace_back(Point{a.points[p.from].x - b.points[p.to].x, a.points[p.from].y - b.points[p.to].y}, p.mass);
      cur = next;
      out.measure = cur;
      out.level = k + 1;
    } else {
      require(k > 0, "initial measure is too large for exact transport; raise exact_cap");
      materialized = false;
      if (diffs.empty() || diffs.size() * system.size() > kMaxPushedDiffs) {
        // Too many distinct differences: fall back to W1(Mμ, Mν) ≤ s·W1(μ, ν).
        diffs.clear();
        d = system.contraction_factor() * out.trace.back();
        out.trace.push_back(d);
        out.exact.push_back(false);
        out.iterations = k + 1;
        if (d <= tol) {
          out.converged = true;
          break;
        }
        continue;
      }
      std::map<std::pair<double, double>, double> pushed;
      for (const auto& [v, m] : diffs)
        for (std::size_t i = 0; i < system.size(); ++i) {
          const Point w = system.maps[i].linear(v);
          pushed[{w.x, w.y}] += system.alphas[i] * m;
        }
      diffs.clear();
      d = 0;
      for (const auto& [v, m] : pushed) {
        diffs.emplace_back(Point{v.first, v.second}, m);
        d += m * std::hypot(v.first, v.second);
      }
    }
    out.trace.push_back(d);
    out.exact.push_back(exact);
    out.iterations = k + 1;
    if (d <= tol) {
      out.converged = true;
      break;
    }
    check_trace(out.trace);
  }
  return out;
}

std::vector<Region> probe_family(const GridSpace& space, std::uint64_t seed, std::size_t count) {
  Rng rng(derive_seed(seed, stream_id("probe_family")));
  std::vector<Region> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Role role = k % 2 ? Role::open : Role::compact;
    switch (k % 4) {
      case 0:
      case 1:
        out.push_back(random_solid(space, role, rng, random_size(space, rng)));
        break;
      case 2:
        out.push_back(random_blobs(space, role, rng, 2 + static_cast<int>(rng.below(2)), random_size(space, rng)));
        break;
      default:
        out.push_back(Region{random_half_plane(space, rng) & space.interior(), role});
    }
  }
  return out;
}

GridFixedPoint fixed_point(const TransformSystem& system, const TopoMeasure& mu0, double tol, std::size_t max_iter,
                           std::uint64_t seed, std::size_t kr_restarts, std::size_t kr_iters) {
  require(!system.continuous(), "grid fixed point needs grid transforms");
  const GridSpace& space = system.transforms.front().source();
  const auto probes = probe_family(space, seed);
  GridFixedPoint out;
  LazyMeasure cur(system, mu0, 0);
  max_iter = std::min<std::size_t>(max_iter, LazyMeasure::max_level);
  for (std::size_t k = 0; k < max_iter; ++k) {
    const LazyMeasure nxt = cur.next();
    double sup = 0;
    for (const auto& a : probes) sup = std::max(sup, std::abs(cur(a) - nxt(a)));
    const double kr =
        d_kr_topo_lower(cur.measure(), nxt.measure(), kr_restarts, kr_iters, derive_seed(seed, stream_id("fp_kr"), k))
            .value;
    out.kr_lower.push_back(kr);
    out.probe_sup.push_back(sup);
    out.trace.push_back(std::max(kr, sup));
    out.iterations = k + 1;
    if (out.trace.back() <= tol) {
      out.converged = true;
      out.iterations = k;
      out.measure = cur;
      return out;
    }
    check_trace(out.trace);
    cur = nxt;
  }
  out.measure = cur;
  return out;
}

DiscreteMeasure chaos_game(const TransformSystem& system, std::size_t n, std::size_t burn_in, std::uint64_t seed) {
  require(system.continuous(), "chaos game needs affine maps");
  require(std::abs(system.alpha_sum() - 1) <= 1e-12, "chaos game needs alphas summing to 1");
  require(system.contraction_factor() < 1, "chaos game needs contracting maps");
  require(n >= 1, "chaos game needs at least one sample");
  Rng rng(derive_seed(seed, stream_id("chaos_game")));
  std::vector<double> cum(system.size());
  std::partial_sum(system.alphas.begin(), system.alphas.end(), cum.begin());
  auto pick = [&] {
    const double u = rng.uniform() * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), system.size() - 1);
  };
  Point x{0, 0};
  for (std::size_t k = 0; k < burn_in; ++k) x = system.maps[pick()](x);
  DiscreteMeasure out;
  out.points.reserve(n);
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    x = system.maps[pick()](x);
    out.points.push_back(x);
  }
  return out;
}

double set_distance(const GridSpace& space, const CellSet& a, const CellSet& b) {
  const auto ia = a.indices(), ib = b.indices();
  require(!ia.empty() && !ib.empty(), "set distance of an empty set");
  double best = std::numeric_limits<double>::infinity();
  for (auto p : ia)
    for (auto q : ib) {
      const double gx = std::max(0, std::abs(space.x_of(p) - space.x_of(q)) - 1);
      const double gy = std::max(0, std::abs(space.y_of(p) - space.y_of(q)) - 1);
      best = std::min(best, std::hypot(gx, gy));
      if (best == 0) return 0;
    }
  return best * space.cell_size();
}

namespace {

DiscreteMeasure random_discrete(Rng& rng) {
  DiscreteMeasure m;
  const int k = rng.range(1, 6);
  for (int i = 0; i < k; ++i) m.add({rng.uniform(-1, 2), rng.uniform(-1, 2)}, rng.uniform(0.1, 1.0));
  return m.normalized();
}

}  // namespace

ContractionReport contraction_check(const TransformSystem& system, std::size_t trials, std::uint64_t seed) {
  ContractionReport rep;
  rep.factor = system.contraction_factor();
  bool grid_ok = true;
  if (system.continuous()) {
    require(std::abs(system.alpha_sum() - 1) <= 1e-12, "contraction check needs alphas summing to 1");
    rep.ratios.resize(trials, 0.0);
    parallel_for(trials, [&](std::size_t t) {
      Rng rng(derive_seed(seed, stream_id("contraction"), t));
      const DiscreteMeasure mu = random_discrete(rng), nu = random_discrete(rng);
      const double before = w1_discrete(mu, nu).value;
      if (before < 1e-12) return;
      const double after = w1_discrete(apply_discrete(system, mu), apply_discrete(system, nu)).value;
      rep.ratios[t] = after / before;
    });
  } else {
    const GridSpace& x = system.transforms.front().source();
    Rng rng(derive_seed(seed, stream_id("contraction")));
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& q = system.transforms[t % system.size()];
      const double s = system.factors[t % system.size()];
      const Region k = random_connected(x, Role::compact, rng, 1 + rng.below(6));
      const Region g = random_connected(x, Role::compact, rng, 1 + rng.below(6));
      const Region qk = q(k), qg = q(g);
      if (qk.empty() || qg.empty()) continue;
      const double lhs = set_distance(x, k.cells, g.cells);
      const double rhs = set_distance(q.target(), qk.cells, qg.cells);
      // δ(K, G) ≤ s·δ'(q(K), q(G)) holds iff the ratio is at most s.
      const double ratio = lhs == 0 ? 0 : (rhs == 0 ? std::numeric_limits<double>::infinity() : lhs / rhs);
      rep.ratios.push_back(ratio);
      grid_ok = grid_ok && ratio <= s + 1e-9;
    }
  }
  for (double r : rep.ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  rep.contraction = rep.factor < 1 && rep.max_ratio <= rep.factor + 1e-9 && grid_ok;
  return rep;
}

Raster render_density(const DiscreteMeasure& nu, int resolution, Bounds b) {
  require(resolution >= 16, "raster resolution must be at least 16");
  require(b.xmax > b.xmin && b.ymax > b.ymin, "empty raster bounds");
  Raster r;
  r.width = r.height = resolution;
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
  r.mass.assign(n, 0.0);
  r.counts.assign(n, 0);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const Point p = nu.points[i];
    if (p.x < b.xmin || p.x > b.xmax || p.y < b.ymin || p.y > b.ymax) continue;
    const int col = std::min(resolution - 1, static_cast<int>((p.x - b.xmin) / (b.xmax - b.xmin) * resolution));
    const int row = std::min(resolution - 1, static_cast<int>((b.ymax - p.y) / (b.ymax - b.ymin) * resolution));
    const std::size_t k = static_cast<std::size_t>(row) * resolution + col;
    r.mass[k] += nu.weights[i];
    ++r.counts[k];
    ++inside;
  }
  require(inside > 0, "raster bounds exclude every point");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double m : r.mass)
    if (m > 0) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  r.gray.assign(n, 0);
  const double span = std::log1p(hi / lo);
  for (std::size_t k = 0; k < n; ++k) {
    if (r.mass[k] <= 0) continue;
    const double t = span > 0 ? std::log1p(r.mass[k] / lo) / span : 1.0;
    r.gray[k] = static_cast<std::uint8_t>(std::clamp(std::lround(64 + 191 * t), 1L, 255L));
  }
  return r;
}

void write_ppm(const Raster& r, std::ostream& out) {
  out << "P6\n" << r.width << ' ' << r.height << "\n255\n";
  for (auto g : r.gray) {
    const char c = static_cast<char>(g);
    out.put(c).put(c).put(c);
  }
}

}  // namespace qm
