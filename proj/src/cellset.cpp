#include "qm/cellset.hpp"

#include <bit>
#include <sstream>

#include "qm/error.hpp"

namespace qm {

std::size_t CellSet::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool CellSet::any() const {
  for (auto w : words_)
    if (w) return true;
  return false;
}

bool CellSet::subset_of(const CellSet& other) const {
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k] & ~other.words_[k]) return false;
  return true;
}

bool CellSet::intersects(const CellSet& other) const {
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k] & other.words_[k]) return true;
  return false;
}

CellSet& CellSet::operator&=(const CellSet& o) {
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
  return *this;
}
CellSet& CellSet::operator|=(const CellSet& o) {
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
  return *this;
}
CellSet& CellSet::operator^=(const CellSet& o) {
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= o.words_[k];
  return *this;
}
CellSet& CellSet::operator-=(const CellSet& o) {
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~o.words_[k];
  return *this;
}

std::vector<std::size_t> CellSet::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < words_.size(); ++k) {
    std::uint64_t w = words_[k];
    while (w) {
      out.push_back(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

std::size_t CellSet::first() const {
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(words_[k]));
  return n_;
}

std::size_t CellSet::hash() const {
  std::uint64_t h = 0x84222325cbf29ce4ULL ^ n_;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::string CellSet::to_rle() const {
  std::ostringstream out;
  bool bit = false;
  std::size_t run = 0;
  bool first_run = true;
  std::size_t last_one = n_;
  for (std::size_t i = n_; i-- > 0;)
    if (test(i)) {
      last_one = i;
      break;
    }
  if (last_one == n_) return "";
  for (std::size_t i = 0; i <= last_one; ++i) {
    if (test(i) == bit) {
      ++run;
      continue;
    }
    if (!first_run) out << '.';
    out << run;
    first_run = false;
    bit = !bit;
    run = 1;
  }
  if (!first_run) out << '.';
  out << run;
  return out.str();
}

CellSet CellSet::from_rle(const std::string& text, std::size_t n) {
  CellSet s(n);
  if (text.empty()) return s;
  std::size_t pos = 0;
  bool bit = false;
  std::size_t at = 0;
  while (pos <= text.size()) {
    std::size_t dot = text.find('.', pos);
    if (dot == std::string::npos) dot = text.size();
    const std::string token = text.substr(pos, dot - pos);
    require(!token.empty() && token.find_first_not_of("0123456789") == std::string::npos,
            "malformed run-length region '" + text + "'");
    const std::size_t run = std::stoul(token);
    require(at + run <= n, "run-length region exceeds grid size");
    if (bit)
      for (std::size_t i = at; i < at + run; ++i) s.set(i);
    at += run;
    bit = !bit;
    pos = dot + 1;
  }
  return s;
}

}  // namespace qm
