#include "qm/kr.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qm/error.hpp"
#include "qm/parallel.hpp"
#include "qm/quasi_integral.hpp"
#include "qm/random.hpp"

namespace qm {

double DiscreteMeasure::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void DiscreteMeasure::add(Point p, double w) {
  points.push_back(p);
  weights.push_back(w);
}

DiscreteMeasure DiscreteMeasure::merged(double tol) const {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < size(); ++i)
    if (weights[i] > 0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point p = points[a], q = points[b];
    if (p.x != q.x) return p.x < q.x;
    if (p.y != q.y) return p.y < q.y;
    return a < b;
  });
  std::vector<char> used(size(), 0);
  DiscreteMeasure out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (used[i]) continue;
    double w = weights[i];
    for (std::size_t l = k + 1; l < order.size() && points[order[l]].x - points[i].x <= tol; ++l) {
      const std::size_t j = order[l];
      if (!used[j] && std::abs(points[j].y - points[i].y) <= tol) {
        used[j] = 1;
        w += weights[j];
      }
    }
    out.add(points[i], w);
  }
  return out;
}

DiscreteMeasure DiscreteMeasure::normalized() const {
  const double t = total();
  require(t > 0, "cannot normalize a zero measure");
  DiscreteMeasure out = *this;
  for (auto& w : out.weights) w /= t;
  return out;
}

Point DiscreteMeasure::mean() const {
  Point m;
  const double t = total();
  for (std::size_t i = 0; i < size(); ++i) {
    m.x += weights[i] * points[i].x;
    m.y += weights[i] * points[i].y;
  }
  m.x /= t;
  m.y /= t;
  return m;
}

DiscreteMeasure DiscreteMeasure::read_csv(std::istream& in) {
  DiscreteMeasure out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y, w;
    if (!(ss >> x >> y >> w)) {
      if (row == 1) continue;  // header
      throw Error("bad measure row " + std::to_string(row) + ": expected x,y,weight");
    }
    require(w >= 0 && std::isfinite(w), "negative or non-finite weight in row " + std::to_string(row));
    out.add({x, y}, w);
  }
  return out;
}

void DiscreteMeasure::write_csv(std::ostream& out) const {
  out << "x,y,weight\n";
  const auto old = out.precision(12);
  for (std::size_t i = 0; i < size(); ++i) out << points[i].x << ',' << points[i].y << ',' << weights[i] << '\n';
  out.precision(old);
}

W1Result w1_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const DiscreteMeasure a = mu.merged(0), b = nu.merged(0);
  require(a.size() > 0 && b.size() > 0, "w1 of an empty measure");
  require(std::abs(a.total() - b.total()) <= 1e-12 * std::max(1.0, a.total()), "unbalanced; normalize first");
  const TransportResult t = solve_transport(a.points, a.weights, b.points, b.weights);
  W1Result r;
  r.value = t.cost;
  r.dual = t.dual;
  r.gap = std::abs(t.cost - t.dual);
  r.plan = t.plan;
  r.u = t.u;
  r.v = t.v;
  r.source = a;
  r.target = b;
  return r;
}

namespace {

struct Binned {
  DiscreteMeasure centroids;
  double quantization = 0;
};

Binned bin(const DiscreteMeasure& m, double spacing) {
  struct Acc {
    double w = 0, x = 0, y = 0;
  };
  std::map<std::pair<long long, long long>, Acc> bins;
  std::vector<std::pair<long long, long long>> key(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    key[i] = {static_cast<long long>(std::floor(m.points[i].x / spacing)),
              static_cast<long long>(std::floor(m.points[i].y / spacing))};
    auto& a = bins[key[i]];
    a.w += m.weights[i];
    a.x += m.weights[i] * m.points[i].x;
    a.y += m.weights[i] * m.points[i].y;
  }
  Binned out;
  std::map<std::pair<long long, long long>, Point> where;
  for (const auto& [k, a] : bins) {
    const Point c{a.x / a.w, a.y / a.w};
    where[k] = c;
    out.centroids.add(c, a.w);
  }
  for (std::size_t i = 0; i < m.size(); ++i) out.quantization += m.weights[i] * distance(m.points[i], where[key[i]]);
  return out;
}

}  // namespace

BinnedW1 w1_binned_upper(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double spacing) {
  require(spacing > 0, "bin spacing must be positive");
  const Binned a = bin(mu, spacing), b = bin(nu, spacing);
  BinnedW1 r;
  r.core = w1_discrete(a.centroids, b.centroids).value;
  r.quantization = a.quantization + b.quantization;
  r.upper = r.core + r.quantization;
  r.bins_mu = a.centroids.size();
  r.bins_nu = b.centroids.size();
  return r;
}

std::vector<LipEdge> lip_edges(const GridSpace& space) {
  std::vector<LipEdge> edges;
  const double h = space.cell_size();
  for (auto c : space.interior().indices())
    for (auto n : space.neighbors(c, Adjacency::eight)) {
      if (n <= c) continue;
      const bool diagonal = space.x_of(n) != space.x_of(c) && space.y_of(n) != space.y_of(c);
      edges.push_back({c, n, diagonal ? std::sqrt(2.0) * h : h});
    }
  return edges;
}

void clip_pair(double& fa, double& fb, double length, bool pin_a, bool pin_b) {
  const double gap = fa - fb;
  const double excess = std::abs(gap) - length;
  if (excess <= 0 || (pin_a && pin_b)) return;
  const double s = gap > 0 ? 1.0 : -1.0;
  if (pin_a) {
    fb += s * excess;
  } else if (pin_b) {
    fa -= s * excess;
  } else {
    fa -= s * excess / 2;
    fb += s * excess / 2;
  }
}

namespace {

CellSet pinned_cells(const GridSpace& space) {
  return space.mode() == Mode::marked_infinity ? space.frame() : CellSet(space.cell_count());
}

}  // namespace

GridFunction lip_project(const GridSpace& space, const GridFunction& f, std::size_t max_sweeps) {
  require(f.size() == space.cell_count(), "function size does not match the grid");
  GridFunction g = f;
  const CellSet pinned = pinned_cells(space);
  for (std::size_t c = 0; c < g.size(); ++c)
    if (!space.admissible(c) || pinned.test(c)) g[c] = 0;
  const auto edges = lip_edges(space);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double worst = 0;
    for (const auto& e : edges) {
      const double v = std::abs(g[e.a] - g[e.b]) - e.length;
      if (v > worst) worst = v;
      if (v > 0) clip_pair(g[e.a], g[e.b], e.length, pinned.test(e.a), pinned.test(e.b));
    }
    if (worst < 1e-10) return g;
  }
  throw Error("lip_project did not converge in " + std::to_string(max_sweeps) + " sweeps");
}

double lipschitz_constant(const GridSpace& space, const GridFunction& f) {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < space.cell_count(); ++c)
    if (space.admissible(c) || space.mode() == Mode::marked_infinity) cells.push_back(c);
  auto value = [&](std::size_t c) { return space.admissible(c) ? f[c] : 0.0; };
  double best = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double fi = value(cells[i]);
    const Point pi = space.center(cells[i]);
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const double df = std::abs(fi - value(cells[j]));
      if (df == 0) continue;
      best = std::max(best, df / distance(pi, space.center(cells[j])));
    }
  }
  return best;
}

namespace {

struct Ascent {
  const TopoMeasure& mu;
  const TopoMeasure& nu;
  const GridSpace& space;
  bool nonnegative;
  CellSet free;

  double gap(const GridFunction& f) const { return quasi_integral(mu, f) - quasi_integral(nu, f); }

  // Slopes of ρ_μ − ρ_ν with the current ordering of values frozen: the
  // weight of a cell is the increment of the measure when the cell joins the
  // strict superlevel set above it.
  std::vector<double> slope(const GridFunction& f) const {
    std::vector<std::size_t> order = space.interior().indices();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
    std::vector<double> g(space.cell_count(), 0.0);
    Region prefix = space.empty(Role::open);
    double pm = 0, pn = 0;
    for (auto c : order) {
      prefix.cells.set(c);
      const double m = mu(prefix), n = nu(prefix);
      g[c] = (m - pm) - (n - pn);
      pm = m;
      pn = n;
    }
    return g;
  }

  GridFunction feasible(GridFunction f) const {
    f = lip_project(space, f);
    if (nonnegative)
      for (auto& v : f.values) v = std::max(v, 0.0);
    return f;
  }
};

GridFunction cone(const GridSpace& space, Point c, double radius, double sign) {
  GridFunction f(space.cell_count());
  for (auto i : space.interior().indices()) f[i] = sign * std::max(0.0, radius - distance(space.center(i), c));
  return f;
}

}  // namespace

KrLowerBound d_kr_topo_lower(const TopoMeasure& mu, const TopoMeasure& nu, std::size_t restarts, std::size_t iters,
                             std::uint64_t seed) {
  require(mu.space() == nu.space(), "KR distance between measures on different spaces");
  const GridSpace& space = mu.space();
  const bool nonnegative = mu.kind() == MeasureKind::deficient || nu.kind() == MeasureKind::deficient;
  Ascent asc{mu, nu, space, nonnegative, space.interior() - pinned_cells(space)};
  const auto cells = asc.free.indices();
  require(!cells.empty(), "no free cells for test functions");
  const double h = space.cell_size();
  const double diam = h * std::hypot(space.width(), space.height());

  struct Best {
    double gap = 0;
    GridFunction f;
  };
  std::vector<Best> results(std::max<std::size_t>(restarts, 1));
  parallel_for(results.size(), [&](std::size_t r) {
    Rng rng(derive_seed(seed, stream_id("kr_lower"), r));
    const Point c = space.center(cells[rng.below(cells.size())]);
    GridFunction f = cone(space, c, rng.uniform(h, diam / 2), 1.0);
    if (r % 3 == 2)
      for (auto i : cells) f[i] = rng.uniform(-diam / 4, diam / 4);
    f = asc.feasible(f);
    double cur = asc.gap(f);
    Best best{std::abs(cur), f};
    double step = diam / 4;
    for (std::size_t it = 0; it < iters && step > 1e-6 * h; ++it) {
      const double sign = cur >= 0 ? 1.0 : -1.0;
      const auto g = asc.slope(f);
      GridFunction trial = f;
      for (auto i : cells) trial[i] += step * sign * g[i];
      trial = asc.feasible(trial);
      const double t = asc.gap(trial);
      if (std::abs(t) > std::abs(cur)) {
        f = trial;
        cur = t;
        if (std::abs(cur) > best.gap) best = {std::abs(cur), f};
      } else {
        step *= 0.6;
      }
    }
    results[r] = best;
  });

  std::size_t pick = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].gap > results[pick].gap) pick = r;
  KrLowerBound out;
  auto consider = [&](const GridFunction& f) {
    const double gap = std::abs(asc.gap(f));
    const double lip = lipschitz_constant(space, f);
    const double value = gap / std::max(lip, 1.0);
    if (value > out.value || out.witness.size() == 0) {
      out.value = value;
      out.raw_gap = gap;
      out.lipschitz = lip;
      out.witness = f;
    }
  };
  const GridFunction& f = results[pick].f;
  consider(f);
  // Exactly 1-Lipschitz cones through the extreme cells of the best function.
  auto hi = std::max_element(cells.begin(), cells.end(), [&](auto a, auto b) { return f[a] < f[b]; });
  auto lo = std::min_element(cells.begin(), cells.end(), [&](auto a, auto b) { return f[a] < f[b]; });
  const bool free_boundary = space.mode() == Mode::compact && !nonnegative;
  for (std::size_t p : {*hi, *lo}) {
    const Point c = space.center(p);
    GridFunction g(space.cell_count());
    for (auto i : space.interior().indices()) {
      const double d = distance(space.center(i), c);
      g[i] = free_boundary ? (p == *hi ? -d : d) : std::max(0.0, std::abs(f[p]) - d);
    }
    for (auto i : pinned_cells(space).indices()) g[i] = 0;
    consider(g);
  }
  return out;
}

}  // namespace qm
