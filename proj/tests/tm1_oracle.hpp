#pragma once

// Bitmask geometry for regions of a 4x4 block of cells, written from the
// closed-square / open-interior reading of roles without using the library.
// Bit i is cell (i % 4, i / 4).

#include <array>
#include <cstdint>
#include <vector>

#include "qm/grid.hpp"

namespace oracle {

using Mask = std::uint32_t;
constexpr Mask kAll = 0xFFFF;

struct Block {
  // Marked mode: the block is the interior of a 6x6 grid, its outer edges
  // and corners are not part of the space.
  bool open_boundary = false;
  std::array<Mask, 16> n4{}, n8{};
  // Cells around each lattice vertex that belongs to the space.
  std::array<Mask, 25> vertex{};
  int vertices = 0;
  // Pairs of 4-adjacent cells (each edge once).
  std::array<std::array<int, 2>, 24> edges{};
};

inline Block make_block(bool open_boundary) {
  Block b;
  b.open_boundary = open_boundary;
  auto bit = [](int x, int y) { return Mask{1} << (y * 4 + x); };
  auto in = [](int x, int y) { return x >= 0 && y >= 0 && x < 4 && y < 4; };
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !in(x + dx, y + dy)) continue;
          b.n8[y * 4 + x] |= bit(x + dx, y + dy);
          if (dx == 0 || dy == 0) b.n4[y * 4 + x] |= bit(x + dx, y + dy);
        }
  for (int vy = 0; vy <= 4; ++vy)
    for (int vx = 0; vx <= 4; ++vx) {
      Mask m = 0;
      int present = 0;
      for (int cy = vy - 1; cy <= vy; ++cy)
        for (int cx = vx - 1; cx <= vx; ++cx)
          if (in(cx, cy)) {
            m |= bit(cx, cy);
            ++present;
          }
      if (open_boundary && present < 4) continue;
      b.vertex[b.vertices++] = m;
    }
  int e = 0;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      if (x + 1 < 4) b.edges[e++] = {y * 4 + x, y * 4 + x + 1};
      if (y + 1 < 4) b.edges[e++] = {y * 4 + x, (y + 1) * 4 + x};
    }
  return b;
}

inline Mask dilate(const std::array<Mask, 16>& nb, Mask m) {
  Mask out = 0;
  for (int i = 0; i < 16; ++i)
    if (m >> i & 1U) out |= nb[i];
  return out;
}

// Flood fill inside m from its lowest cell.
inline Mask reach(const std::array<Mask, 16>& nb, Mask m, Mask seed) {
  Mask seen = seed & m, frontier = seen;
  while (frontier) {
    const Mask next = dilate(nb, frontier) & m & ~seen;
    seen |= next;
    frontier = next;
  }
  return seen;
}

inline std::vector<Mask> split(const std::array<Mask, 16>& nb, Mask m) {
  std::vector<Mask> out;
  while (m) {
    const Mask c = reach(nb, m, m & (~m + 1));
    out.push_back(c);
    m &= ~c;
  }
  return out;
}

inline bool connected(const std::array<Mask, 16>& nb, Mask m) { return split(nb, m).size() <= 1; }

// Library region for a mask: the block sits at (offset, offset).
inline qm::Region region(const qm::GridSpace& s, Mask m, qm::Role role, int offset = 0) {
  qm::Region r = s.empty(role);
  for (int i = 0; i < 16; ++i)
    if (m >> i & 1U) r.cells.set(s.index(i % 4 + offset, i / 4 + offset));
  return r;
}

// Cells whose closed squares stay inside the space: in marked mode, cells
// away from the outer ring of the block.
inline Mask precompact_cells(const Block& b) { return b.open_boundary ? 0x0660 : kAll; }

// Compact A and compact B, union compact.
inline bool cc(const Block& b, Mask a, Mask c) { return !(a & c) && !(dilate(b.n8, a) & c); }

// Open A and open B, union open: no shared edge, and no vertex of the space
// whose surrounding cells all lie in A ∪ B with both present.
inline bool oo(const Block& b, Mask a, Mask c) {
  if ((a & c) || (dilate(b.n4, a) & c)) return false;
  for (int v = 0; v < b.vertices; ++v) {
    const Mask m = b.vertex[v];
    if ((m & (a | c)) == m && (m & a) && (m & c)) return false;
  }
  return true;
}

// Compact A and open B with A ∪ B compact: the frontier of B's open set
// must be covered by A's squares.
inline bool co_compact(const Block& b, Mask a, Mask c) {
  if (a & c) return false;
  const Mask u = a | c;
  for (const auto& e : b.edges) {
    const bool bc0 = c >> e[0] & 1U, bc1 = c >> e[1] & 1U;
    const bool u0 = u >> e[0] & 1U, u1 = u >> e[1] & 1U;
    if ((bc0 && !u1) || (bc1 && !u0)) return false;
  }
  for (int v = 0; v < b.vertices; ++v) {
    const Mask m = b.vertex[v];
    if ((m & c) && (m & ~u) && !(m & a)) return false;
  }
  return true;
}

// Compact A and open B with A ∪ B open: A's squares lie in the interior of
// the union.
inline bool co_open(const Block& b, Mask a, Mask c) {
  if (a & c) return false;
  return (dilate(b.n8, a) & ~(a | c) & kAll) == 0;
}

}  // namespace oracle
