#pragma once

#include "nlseg/grid.hpp"
#include "nlseg/norm.hpp"

namespace nlseg {

// Cells of the set with at least one 4-neighbour (8-neighbour if conn8)
// outside the set or outside the box.
Mask boundary_cells(const Mask& m, const Grid& g, bool conn8 = false);

// Squared weighted Euclidean distance transform in index units:
// min over set cells of wx*di^2 + wy*dj^2. Non-set cells far from the set get
// a large value; an empty set gives all-infinite output.
Field edt_squared(const Mask& m, int nx, int ny, double wx = 1.0, double wy = 1.0);

// d_rho(x, mask) at every cell centre (0 on the set). Exact on the lattice:
// quadratic norms use the weighted transform, other norms a pruned minimum
// over the set's boundary cells. Throws EmptySet.
Field rho_distance_field(const Mask& m, const Grid& g, const Norm& n);

// Minimum rho-distance between cell centres of two sets. Throws EmptySet.
double set_distance(const Mask& a, const Mask& b, const Grid& g, const Norm& n);

// {x : exists y in mask with rho(x - y) <= r} (or < r when open).
Mask dilate_by_ball(const Mask& m, const Grid& g, double r, const Norm& n, bool open = false);

// Complement of the dilation of the complement; cells beyond the box count
// as outside the set.
Mask erode_by_ball(const Mask& m, const Grid& g, double r, const Norm& n, bool open = false);

Mask mask_not(const Mask& a);
Mask mask_and(const Mask& a, const Mask& b);
Mask mask_or(const Mask& a, const Mask& b);
Mask mask_minus(const Mask& a, const Mask& b);
Mask mask_xor(const Mask& a, const Mask& b);

}  // namespace nlseg
