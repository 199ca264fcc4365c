#pragma once

#include <cstddef>

#include "qm/grid.hpp"
#include "qm/random.hpp"

namespace qm {

// Random connected region of about `size` cells grown from a random
// admissible cell (or from `start` when given) under the role's adjacency.
Region random_connected(const GridSpace& space, Role role, Rng& rng, std::size_t size,
                        std::size_t start = static_cast<std::size_t>(-1));

// Random solid region: a connected blob with every complement component but
// one (compact mode) or every hole (marked-infinity mode) filled in.
Region random_solid(const GridSpace& space, Role role, Rng& rng, std::size_t size);

// Fill all enclosed complement components so the (connected) region becomes
// solid.
Region fill_to_solid(const GridSpace& space, const Region& connected);

// Union of up to `blobs` random connected pieces.
Region random_blobs(const GridSpace& space, Role role, Rng& rng, int blobs, std::size_t size);

// Independent coin flips per admissible cell.
Region random_cells(const GridSpace& space, Role role, Rng& rng, double density);

// Cells on one side of a random line through the grid.
CellSet random_half_plane(const GridSpace& space, Rng& rng);

// Size drawn so blobs cover a useful range of the grid.
std::size_t random_size(const GridSpace& space, Rng& rng);

}  // namespace qm

namespace qm {

// Like random_connected, but only cells of `mask` may be used. Returns an
// empty region when the mask is empty.
Region random_connected_within(const GridSpace& space, const CellSet& mask, Role role, Rng& rng, std::size_t size);

// Cells of `cells` whose closed square lies in the open interior of the union
// of the squares of `cells`.
CellSet closed_interior(const GridSpace& space, const CellSet& cells);

}  // namespace qm
