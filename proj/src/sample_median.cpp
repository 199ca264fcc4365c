#include "qm/sample_median.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <sstream>

#include "qm/error.hpp"
#include "qm/random.hpp"
#include "qm/sampling.hpp"

namespace qm {

namespace {

using Wide = __int128;

Fraction reduce(Wide n, Wide d) {
  require(d != 0, "fraction with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Wide a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    const Wide t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  require(n >= INT64_MIN && n <= INT64_MAX && d <= INT64_MAX, "fraction overflow");
  Fraction f;
  f.num = static_cast<std::int64_t>(n);
  f.den = static_cast<std::int64_t>(d);
  return f;
}

}  // namespace

Fraction::Fraction(std::int64_t n, std::int64_t d) { *this = reduce(n, d); }

std::string Fraction::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

Fraction operator+(const Fraction& a, const Fraction& b) {
  return reduce(Wide(a.num) * b.den + Wide(b.num) * a.den, Wide(a.den) * b.den);
}
Fraction operator-(const Fraction& a, const Fraction& b) {
  return reduce(Wide(a.num) * b.den - Wide(b.num) * a.den, Wide(a.den) * b.den);
}
Fraction operator*(const Fraction& a, const Fraction& b) { return reduce(Wide(a.num) * b.num, Wide(a.den) * b.den); }
bool Fraction::operator<(const Fraction& o) const { return Wide(num) * o.den < Wide(o.num) * den; }

std::int64_t VariableFamily1D::total_weight() const { return std::accumulate(weights.begin(), weights.end(), std::int64_t{0}); }

void VariableFamily1D::validate() const {
  require(cells >= 1, "family needs at least one cell");
  require(!weights.empty(), "family needs at least one sample point");
  for (auto w : weights) require(w > 0, "sample weights must be positive");
  require(maps.size() >= 3, "family needs at least 3 maps");
  for (const auto& m : maps) {
    require(m.size() == weights.size(), "every map needs one value per sample point");
    for (int v : m) require(v >= 0 && v < cells, "map value outside the line");
  }
}

VariableFamily1D VariableFamily1D::read_csv(std::istream& in, std::int64_t cells) {
  VariableFamily1D fam;
  std::string line;
  std::size_t row = 0;
  int largest = -1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::int64_t w;
    if (!(ss >> w)) {
      if (row == 1) continue;  // header
      throw Error("bad family row " + std::to_string(row));
    }
    std::vector<int> vals;
    int v;
    while (ss >> v) vals.push_back(v);
    if (fam.maps.empty()) fam.maps.resize(vals.size());
    require(vals.size() == fam.maps.size(), "family row " + std::to_string(row) + " has the wrong number of maps");
    fam.weights.push_back(w);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      fam.maps[i].push_back(vals[i]);
      largest = std::max(largest, vals[i]);
    }
  }
  fam.cells = cells > 0 ? cells : largest + 1;
  fam.validate();
  return fam;
}

LineSet interval(std::int64_t cells, std::int64_t lo, std::int64_t hi) {
  require(0 <= lo && lo <= hi && hi < cells, "interval outside the line");
  LineSet a(cells, 0);
  for (auto c = lo; c <= hi; ++c) a[c] = 1;
  return a;
}

std::vector<std::pair<std::int64_t, std::int64_t>> runs(const LineSet& a) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  const auto n = static_cast<std::int64_t>(a.size());
  for (std::int64_t c = 0; c < n;) {
    if (!a[c]) {
      ++c;
      continue;
    }
    std::int64_t e = c;
    while (e + 1 < n && a[e + 1]) ++e;
    out.emplace_back(c, e);
    c = e + 1;
  }
  return out;
}

Fraction majority_mass(const VariableFamily1D& fam, const std::vector<std::size_t>& which, std::size_t threshold,
                       const LineSet& a) {
  require(static_cast<std::int64_t>(a.size()) == fam.cells, "set size does not match the line");
  std::int64_t mass = 0;
  for (std::size_t y = 0; y < fam.points(); ++y) {
    std::size_t hits = 0;
    for (auto i : which) hits += a[fam.maps[i][y]] ? 1 : 0;
    if (hits >= threshold) mass += fam.weights[y];
  }
  return Fraction(mass, fam.total_weight());
}

namespace {

std::vector<std::size_t> all_maps(const VariableFamily1D& fam) {
  std::vector<std::size_t> w(fam.maps.size());
  std::iota(w.begin(), w.end(), 0);
  return w;
}

// Value on the interval [lo, hi] of the segment, given a counting rule that
// is valid on solid intervals. On a segment the solid intervals are those
// touching an end; a middle interval is the whole line minus the two end
// pieces around it.
template <class F>
Fraction on_interval(std::int64_t cells, std::int64_t lo, std::int64_t hi, F&& count) {
  if (lo == 0 || hi == cells - 1) return count(interval(cells, lo, hi));
  return count(interval(cells, 0, cells - 1)) - count(interval(cells, 0, lo - 1)) -
         count(interval(cells, hi + 1, cells - 1));
}

template <class F>
Fraction sum_over_runs(const LineSet& a, F&& per_run) {
  Fraction total;
  for (auto [lo, hi] : runs(a)) total += per_run(interval(static_cast<std::int64_t>(a.size()), lo, hi));
  return total;
}

Fraction pushforward(const VariableFamily1D& fam, std::size_t k, const LineSet& a) {
  std::int64_t mass = 0;
  for (std::size_t y = 0; y < fam.points(); ++y)
    if (a[order_statistic(fam, k, y)]) mass += fam.weights[y];
  return Fraction(mass, fam.total_weight());
}

}  // namespace

Fraction gdsm_region(const VariableFamily1D& fam, const LineSet& a) {
  require(fam.maps.size() % 2 == 1, "even family: use gdsm_even");
  const auto r = runs(a);
  require(r.size() == 1, "gdsm_region needs an interval");
  const auto all = all_maps(fam);
  const std::size_t threshold = (fam.maps.size() + 1) / 2;
  return on_interval(fam.cells, r[0].first, r[0].second,
                     [&](const LineSet& s) { return majority_mass(fam, all, threshold, s); });
}

Fraction gdsm_value(const VariableFamily1D& fam, const LineSet& a) {
  return sum_over_runs(a, [&](const LineSet& run) { return gdsm_region(fam, run); });
}

int order_statistic(const VariableFamily1D& fam, std::size_t k, std::size_t y) {
  require(k >= 1 && k <= fam.maps.size(), "order statistic index out of range");
  std::vector<int> v;
  v.reserve(fam.maps.size());
  for (const auto& m : fam.maps) v.push_back(m[y]);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

EvenGdsm gdsm_even_parts(const VariableFamily1D& fam, const LineSet& a) {
  const std::size_t m = fam.maps.size();
  require(m % 2 == 0, "gdsm_even needs an even family");
  const std::size_t n = m / 2;
  const Fraction avg(1, static_cast<std::int64_t>(m));
  EvenGdsm out;
  for (auto [lo, hi] : runs(a)) {
    const LineSet run = interval(fam.cells, lo, hi);
    for (std::size_t j = 0; j < m; ++j) {
      auto aug = all_maps(fam);
      aug.push_back(j);
      out.augmented += avg * on_interval(fam.cells, lo, hi, [&](const LineSet& s) {
        return majority_mass(fam, aug, n + 1, s);
      });
      std::vector<std::size_t> loo;
      for (std::size_t i = 0; i < m; ++i)
        if (i != j) loo.push_back(i);
      out.leave_one_out += avg * on_interval(fam.cells, lo, hi, [&](const LineSet& s) {
        return majority_mass(fam, loo, n, s);
      });
    }
    out.order_statistics += Fraction(1, 2) * (pushforward(fam, n, run) + pushforward(fam, n + 1, run));
  }
  return out;
}

Fraction gdsm_even(const VariableFamily1D& fam, const LineSet& a) {
  const EvenGdsm e = gdsm_even_parts(fam, a);
  require(e.augmented == e.leave_one_out && e.augmented == e.order_statistics,
          "even g.d.s.m. readings disagree: augmented " + e.augmented.str() + ", leave-one-out " +
              e.leave_one_out.str() + ", order statistics " + e.order_statistics.str());
  return e.augmented;
}

std::vector<Fraction> gdsm_measure_1d(const VariableFamily1D& fam) {
  fam.validate();
  const std::size_t m = fam.maps.size();
  const std::int64_t w = fam.total_weight();
  std::vector<Fraction> mass(fam.cells);
  if (m % 2 == 1) {
    for (std::size_t y = 0; y < fam.points(); ++y) mass[order_statistic(fam, (m + 1) / 2, y)] += Fraction(fam.weights[y], w);
  } else {
    for (std::size_t y = 0; y < fam.points(); ++y) {
      mass[order_statistic(fam, m / 2, y)] += Fraction(fam.weights[y], 2 * w);
      mass[order_statistic(fam, m / 2 + 1, y)] += Fraction(fam.weights[y], 2 * w);
    }
  }
  // Cumulative sums give interval masses in O(1).
  std::vector<Fraction> prefix(fam.cells + 1);
  for (std::int64_t c = 0; c < fam.cells; ++c) prefix[c + 1] = prefix[c] + mass[c];
  // Initial and final segments are the solid intervals where the count is
  // the definition; single cells go through the extension.
  auto check = [&](std::int64_t lo, std::int64_t hi) {
    const LineSet a = interval(fam.cells, lo, hi);
    const Fraction direct = m % 2 == 1 ? gdsm_region(fam, a) : gdsm_even(fam, a);
    const Fraction pushed = prefix[hi + 1] - prefix[lo];
    require(direct == pushed, "g.d.s.m. differs from the order-statistic pushforward on [" + std::to_string(lo) + "," +
                                  std::to_string(hi) + "]: " + direct.str() + " vs " + pushed.str());
  };
  for (std::int64_t c = 0; c < fam.cells; ++c) {
    check(c, c);
    check(0, c);
    check(c, fam.cells - 1);
  }
  return mass;
}

SolidVariable1D monotone_1d(std::vector<int> map, std::int64_t target_cells) {
  require(!map.empty(), "empty map");
  bool up = true, down = true;
  for (std::size_t c = 0; c < map.size(); ++c) {
    require(map[c] >= 0 && map[c] < target_cells, "map value outside the target line");
    if (c == 0) continue;
    const int d = map[c] - map[c - 1];
    require(std::abs(d) <= 1, "map is not continuous: jump at cell " + std::to_string(c));
    up = up && d >= 0;
    down = down && d <= 0;
  }
  require(up || down, "map is not monotone");
  return {std::move(map), target_cells, SolidVariable1D::Certificate::monotone};
}

SolidVariable1D checked_1d(std::vector<int> map, std::int64_t target_cells) {
  require(!map.empty(), "empty map");
  SolidVariable1D f{std::move(map), target_cells, SolidVariable1D::Certificate::checked};
  for (std::size_t c = 0; c < f.map.size(); ++c) {
    require(f.map[c] >= 0 && f.map[c] < target_cells, "map value outside the target line");
    if (c > 0 && std::abs(f.map[c] - f.map[c - 1]) > 1)
      throw Error("not a solid variable: jump at cell " + std::to_string(c));
  }
  for (std::int64_t lo = 0; lo < target_cells; ++lo)
    for (std::int64_t hi = lo; hi < target_cells; ++hi)
      if (runs(preimage(f, interval(target_cells, lo, hi))).size() > 1)
        throw Error("not a solid variable: preimage of [" + std::to_string(lo) + "," + std::to_string(hi) +
                    "] is disconnected");
  return f;
}

VariableFamily1D push_family(const SolidVariable1D& f, const VariableFamily1D& fam) {
  require(static_cast<std::int64_t>(f.map.size()) == fam.cells, "solid variable source does not match the family");
  VariableFamily1D out = fam;
  out.cells = f.target_cells;
  for (auto& m : out.maps)
    for (auto& v : m) v = f.map[v];
  return out;
}

LineSet preimage(const SolidVariable1D& f, const LineSet& a) {
  require(static_cast<std::int64_t>(a.size()) == f.target_cells, "set does not live on the target line");
  LineSet out(f.map.size(), 0);
  for (std::size_t c = 0; c < f.map.size(); ++c) out[c] = a[f.map[c]];
  return out;
}

SolidVariable1D compose(const SolidVariable1D& second, const SolidVariable1D& first) {
  require(first.target_cells == static_cast<std::int64_t>(second.map.size()), "compose: lines do not match");
  SolidVariable1D out{first.map, second.target_cells, SolidVariable1D::Certificate::checked};
  for (auto& v : out.map) v = second.map[v];
  if (first.certificate == SolidVariable1D::Certificate::monotone &&
      second.certificate == SolidVariable1D::Certificate::monotone)
    out.certificate = SolidVariable1D::Certificate::monotone;
  return out;
}

CheckReport equivariance_check(const SolidVariable1D& f, const VariableFamily1D& fam, const std::vector<LineSet>& probes) {
  fam.validate();
  const VariableFamily1D pushed = push_family(f, fam);
  const bool odd = fam.maps.size() % 2 == 1;
  auto mu = [&](const VariableFamily1D& g, const LineSet& a) { return odd ? gdsm_value(g, a) : gdsm_even(g, a); };
  CheckReport rep;
  for (const auto& a : probes) {
    const Fraction lhs = mu(pushed, a), rhs = mu(fam, preimage(f, a));
    if (lhs != rhs) {
      rep.fail("equivariance", {}, {lhs.value(), rhs.value()}, lhs.str() + " vs " + rhs.str());
      return rep;
    }
    if (odd)
      for (auto [lo, hi] : runs(a)) {
        // Inverse of the median: T_(n)⁻¹(f⁻¹(A)) = (f∘T)_(n)⁻¹(A) pointwise.
        const std::size_t k = (fam.maps.size() + 1) / 2;
        for (std::size_t y = 0; y < fam.points(); ++y) {
          const int v = order_statistic(pushed, k, y);
          const bool in_lhs = v >= lo && v <= hi;
          const int u = order_statistic(fam, k, y);
          const bool in_rhs = f.map[u] >= lo && f.map[u] <= hi;
          if (in_lhs != in_rhs) {
            rep.fail("median preimage equivariance", {}, {static_cast<double>(y)});
            return rep;
          }
        }
      }
    ++rep.checked;
  }
  return rep;
}

void VariableFamily2D::validate() const {
  require(maps.size() >= 3, "family needs at least 3 maps");
  require(p.valid() && p.space() == y, "sample measure must live on the sample grid");
  for (const auto& m : maps) {
    require(m.size() == y.cell_count(), "every map needs one entry per sample cell");
    for (auto c : y.interior().indices()) require(x.admissible(m[c]), "map value outside the admissible cells");
  }
}

namespace {

ImageTransform majority_q(const GridSpace& x, const GridSpace& y, std::vector<CellMap> maps, std::size_t threshold,
                          std::string name) {
  auto shared = std::make_shared<const std::vector<CellMap>>(std::move(maps));
  const CellSet ys = y.interior();
  return extend_solid_q(
      x, y,
      [shared, threshold, y, ys](const Region& a) {
        Region out = y.empty(a.role);
        for (auto c : ys.indices()) {
          std::size_t hits = 0;
          for (const auto& m : *shared) hits += a.cells.test(m[c]) ? 1 : 0;
          if (hits >= threshold) out.cells.set(c);
        }
        return out;
      },
      std::move(name));
}

}  // namespace

ImageTransform sample_median_q(const VariableFamily2D& fam) {
  fam.validate();
  require(fam.maps.size() % 2 == 1, "sample_median_q needs an odd family");
  return majority_q(fam.x, fam.y, fam.maps, (fam.maps.size() + 1) / 2, "sample_median");
}

EvenGdsm2D gdsm_even_2d(const VariableFamily2D& fam, const Region& a) {
  fam.validate();
  const std::size_t m = fam.maps.size();
  require(m % 2 == 0, "gdsm_even_2d needs an even family");
  EvenGdsm2D out;
  for (std::size_t j = 0; j < m; ++j) {
    auto aug = fam.maps;
    aug.push_back(fam.maps[j]);
    out.augmented += fam.p(majority_q(fam.x, fam.y, aug, m / 2 + 1, "augmented")(a));
    std::vector<CellMap> loo;
    for (std::size_t i = 0; i < m; ++i)
      if (i != j) loo.push_back(fam.maps[i]);
    out.leave_one_out += fam.p(majority_q(fam.x, fam.y, loo, m / 2, "leave_one_out")(a));
  }
  out.augmented /= static_cast<double>(m);
  out.leave_one_out /= static_cast<double>(m);
  return out;
}

double gdsm_2d(const VariableFamily2D& fam, const Region& a) {
  if (fam.maps.size() % 2 == 1) return adjoint_eval(sample_median_q(fam), fam.p, a);
  return gdsm_even_2d(fam, a).augmented;
}

SolidVariable2D isometry_variable(const GridSpace& space, int k) {
  return {space, space, grid_isometry(space, k), SolidVariable2D::Certificate::isometry};
}

SolidVariable2D checked_2d(const GridSpace& from, const GridSpace& to, CellMap map, std::size_t samples,
                           std::uint64_t seed) {
  require(map.size() == from.cell_count(), "map needs one entry per source cell");
  for (auto c : from.interior().indices()) require(to.admissible(map[c]), "map leaves the admissible target cells");
  SolidVariable2D f{from, to, std::move(map), SolidVariable2D::Certificate::checked};
  for (Adjacency adj : {Adjacency::four, Adjacency::eight})
    for (auto c : from.interior().indices())
      for (auto n : from.neighbors(c, adj)) {
        const auto a = f.map[c], b = f.map[n];
        const auto& nb = to.neighbors(a, adj);
        if (a != b && std::find(nb.begin(), nb.end(), b) == nb.end())
          throw Error("not a solid variable: neighbouring cells " + std::to_string(c) + " and " + std::to_string(n) +
                      " are torn apart");
      }
  Rng rng(derive_seed(seed, stream_id("solid_variable")));
  for (std::size_t s = 0; s < samples; ++s) {
    const Role role = s % 2 ? Role::open : Role::compact;
    const Region a = random_solid(to, role, rng, random_size(to, rng));
    const Region pre = preimage(f, a);
    if (!pre.empty() && !is_solid(from, pre))
      throw Error("not a solid variable: preimage of solid region " + a.cells.to_rle() + " is not solid");
  }
  return f;
}

SolidVariable2D compose(const SolidVariable2D& second, const SolidVariable2D& first) {
  require(first.to == second.from, "compose: grids do not match");
  SolidVariable2D out{first.from, second.to, first.map, SolidVariable2D::Certificate::checked};
  for (auto c : first.from.interior().indices()) out.map[c] = second.map[first.map[c]];
  if (first.certificate == SolidVariable2D::Certificate::isometry &&
      second.certificate == SolidVariable2D::Certificate::isometry)
    out.certificate = SolidVariable2D::Certificate::isometry;
  return out;
}

VariableFamily2D push_family(const SolidVariable2D& f, const VariableFamily2D& fam) {
  require(f.from == fam.x, "solid variable source does not match the family");
  VariableFamily2D out = fam;
  out.x = f.to;
  for (auto& m : out.maps)
    for (auto c : fam.y.interior().indices()) m[c] = f.map[m[c]];
  return out;
}

Region preimage(const SolidVariable2D& f, const Region& a) {
  f.to.require_admissible(a);
  Region out = f.from.empty(a.role);
  for (auto c : f.from.interior().indices())
    if (a.cells.test(f.map[c])) out.cells.set(c);
  return out;
}

CheckReport equivariance_check(const SolidVariable2D& f, const VariableFamily2D& fam, const std::vector<Region>& probes) {
  fam.validate();
  const VariableFamily2D pushed = push_family(f, fam);
  const bool odd = fam.maps.size() % 2 == 1;
  ImageTransform q_pushed, q_fam;
  if (odd) {
    q_pushed = sample_median_q(pushed);
    q_fam = sample_median_q(fam);
  }
  CheckReport rep;
  for (const auto& a : probes) {
    const Region pre = preimage(f, a);
    if (odd) {
      const Region l = q_pushed(a), r = q_fam(pre);
      if (l != r) {
        rep.fail("q equivariance", {a, l, r}, {});
        return rep;
      }
      const double lv = fam.p(l), rv = fam.p(r);
      if (lv != rv) {
        rep.fail("equivariance", {a}, {lv, rv});
        return rep;
      }
    } else {
      const double lv = gdsm_2d(pushed, a), rv = gdsm_2d(fam, pre);
      if (lv != rv) {
        rep.fail("equivariance", {a}, {lv, rv});
        return rep;
      }
    }
    ++rep.checked;
  }
  return rep;
}

}  // namespace qm
