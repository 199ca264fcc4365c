#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qm/grid.hpp"
#include "qm/image_transform.hpp"
#include "qm/measure.hpp"
#include "qm/report.hpp"

namespace qm {

// Exact rational with 64-bit parts, always reduced and with a positive
// denominator.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction() = default;
  Fraction(std::int64_t n, std::int64_t d = 1);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  friend Fraction operator+(const Fraction& a, const Fraction& b);
  friend Fraction operator-(const Fraction& a, const Fraction& b);
  friend Fraction operator*(const Fraction& a, const Fraction& b);
  Fraction& operator+=(const Fraction& o) { return *this = *this + o; }
  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Fraction& o) const { return !(*this == o); }
  bool operator<(const Fraction& o) const;
  bool operator<=(const Fraction& o) const { return !(o < *this); }
};

// Maps from a finite weighted sample space into a line of `cells` lattice
// cells. P(y) = weights[y] / Σ weights. A set of cells is read as a union of
// intervals; its maximal runs are the solid pieces.
struct VariableFamily1D {
  std::int64_t cells = 0;
  std::vector<std::int64_t> weights;     // per sample point, positive
  std::vector<std::vector<int>> maps;  // maps[i][y] in [0, cells)

  std::size_t points() const { return weights.size(); }
  std::int64_t total_weight() const;
  void validate() const;

  // Family file: rows "y_weight,T1,T2,...". `cells` is one past the largest
  // value unless given.
  static VariableFamily1D read_csv(std::istream& in, std::int64_t cells = 0);
};

// Cell set on the line, one flag per cell.
using LineSet = std::vector<char>;

LineSet interval(std::int64_t cells, std::int64_t lo, std::int64_t hi);  // inclusive
std::vector<std::pair<std::int64_t, std::int64_t>> runs(const LineSet& a);

// Direct count: P({y : |{i : T_i(y) ∈ A}| ≥ threshold}) over the chosen maps.
Fraction majority_mass(const VariableFamily1D& fam, const std::vector<std::size_t>& which, std::size_t threshold,
                       const LineSet& a);

// Odd family of 2n−1 maps, value on an interval A of the segment. On
// solid intervals (those touching an end of the line) this is the count
// P({y : at least n of the T_i(y) lie in A}); a middle interval gets the
// whole line minus the two end pieces. Throws for even families.
Fraction gdsm_region(const VariableFamily1D& fam, const LineSet& a);

// The g.d.s.m. as a measure: gdsm_region summed over the maximal runs of A.
// Odd families only.
Fraction gdsm_value(const VariableFamily1D& fam, const LineSet& a);

// k-th smallest of the T_i(y) (1-based), duplicates kept.
int order_statistic(const VariableFamily1D& fam, std::size_t k, std::size_t y);

// Even family of 2n maps, evaluated three ways on every run of A (each run
// read as in gdsm_region): the average over the 2n augmented families (each
// with T_j repeated), the average over the 2n leave-one-out families, and
// ½(P∘T_(n)⁻¹ + P∘T_(n+1)⁻¹).
struct EvenGdsm {
  Fraction augmented, leave_one_out, order_statistics;
};
EvenGdsm gdsm_even_parts(const VariableFamily1D& fam, const LineSet& a);
// Throws when the three readings differ.
Fraction gdsm_even(const VariableFamily1D& fam, const LineSet& a);

// Mass per cell: the pushforward of the median (odd) or the average of the
// pushforwards of the two middle order statistics (even). Cross-checked on
// every interval against the counting definitions; throws on a mismatch.
std::vector<Fraction> gdsm_measure_1d(const VariableFamily1D& fam);

// Cell map f between lines with a solid-variable certificate.
struct SolidVariable1D {
  enum class Certificate { monotone, checked };
  std::vector<int> map;  // map[c] for c in the source line
  std::int64_t target_cells = 0;
  Certificate certificate = Certificate::checked;
};

// Nondecreasing or nonincreasing map with unit steps. Throws otherwise.
SolidVariable1D monotone_1d(std::vector<int> map, std::int64_t target_cells);
// Exhaustive check: f continuous (unit steps) and every interval has an
// interval (or empty) preimage. Throws "not a solid variable" with the
// offending interval.
SolidVariable1D checked_1d(std::vector<int> map, std::int64_t target_cells);

// Family {f∘T_i}.
VariableFamily1D push_family(const SolidVariable1D& f, const VariableFamily1D& fam);
LineSet preimage(const SolidVariable1D& f, const LineSet& a);
// First map applied first: (second ∘ first).
SolidVariable1D compose(const SolidVariable1D& second, const SolidVariable1D& first);

// μ_{f∘T}(A) = μ_T(f⁻¹(A)) on every probe, odd or even families.
CheckReport equivariance_check(const SolidVariable1D& f, const VariableFamily1D& fam, const std::vector<LineSet>& probes);

// Maps from the cells of a grid Y into a grid X, with a measure P on Y.
struct VariableFamily2D {
  GridSpace x, y;
  std::vector<CellMap> maps;  // maps[i][y-cell] = x-cell
  TopoMeasure p;

  void validate() const;
};

// Odd family: on solid A, q(A) = {y : at least n of the T_i(y) lie in A},
// extended to all regions. The g.d.s.m. is adjoint(q, P).
ImageTransform sample_median_q(const VariableFamily2D& fam);
double gdsm_2d(const VariableFamily2D& fam, const Region& a);

// Even family: the augmented and leave-one-out averages on one region.
struct EvenGdsm2D {
  double augmented = 0, leave_one_out = 0;
};
EvenGdsm2D gdsm_even_2d(const VariableFamily2D& fam, const Region& a);

struct SolidVariable2D {
  enum class Certificate { isometry, checked };
  GridSpace from, to;
  CellMap map;  // indexed by `from` cells
  Certificate certificate = Certificate::checked;
};

SolidVariable2D isometry_variable(const GridSpace& space, int k);
// Sampled check: neighbours map to equal or neighbouring cells (per role)
// and preimages of sampled solid regions are solid. Throws "not a solid
// variable" with a witness.
SolidVariable2D checked_2d(const GridSpace& from, const GridSpace& to, CellMap map, std::size_t samples,
                           std::uint64_t seed);
SolidVariable2D compose(const SolidVariable2D& second, const SolidVariable2D& first);

VariableFamily2D push_family(const SolidVariable2D& f, const VariableFamily2D& fam);
Region preimage(const SolidVariable2D& f, const Region& a);

// μ_{f∘T}(A) = μ_T(f⁻¹(A)) and q_{f∘T}(A) = q_T(f⁻¹(A)) on every probe.
CheckReport equivariance_check(const SolidVariable2D& f, const VariableFamily2D& fam, const std::vector<Region>& probes);

}  // namespace qm
