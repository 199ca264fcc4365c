#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qm {

// Fixed-size bitset over the cells of a grid (row-major indices).
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void assign(std::size_t i, bool v) { v ? set(i) : reset(i); }

  std::size_t count() const;
  bool any() const;
  bool none() const { return !any(); }

  bool subset_of(const CellSet& other) const;
  bool intersects(const CellSet& other) const;

  CellSet& operator&=(const CellSet& o);
  CellSet& operator|=(const CellSet& o);
  CellSet& operator^=(const CellSet& o);
  CellSet& operator-=(const CellSet& o);  // set difference

  friend CellSet operator&(CellSet a, const CellSet& b) { return a &= b; }
  friend CellSet operator|(CellSet a, const CellSet& b) { return a |= b; }
  friend CellSet operator^(CellSet a, const CellSet& b) { return a ^= b; }
  friend CellSet operator-(CellSet a, const CellSet& b) { return a -= b; }

  bool operator==(const CellSet& o) const { return n_ == o.n_ && words_ == o.words_; }
  bool operator!=(const CellSet& o) const { return !(*this == o); }
  bool operator<(const CellSet& o) const { return words_ < o.words_; }

  std::vector<std::size_t> indices() const;

  // Smallest set index, or size() when empty.
  std::size_t first() const;

  std::size_t hash() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  // Run-length text: alternating run lengths starting with a run of zeros,
  // joined by '.', e.g. "3.2.1" = 000110 followed by zeros.
  std::string to_rle() const;
  static CellSet from_rle(const std::string& text, std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace qm
