#pragma once

#include <cstddef>
#include <vector>

#include "mrl/vec3.hpp"

namespace mrl {

// Indices of the points that are vertices of the 3D convex hull (quickhull).
// Degenerate inputs (fewer than 4 points, or all points collinear/coplanar)
// return every index: each point lies on the boundary of the degenerate
// hull. Order is ascending.
std::vector<std::size_t> convex_hull_vertices(const std::vector<Vec3>& points);

}  // namespace mrl
