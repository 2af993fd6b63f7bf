#pragma once

#include "fruitsize/camera.hpp"
#include "fruitsize/mask.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fruitsize {

/// Vertices of the 2D convex hull in counter-clockwise order (collinear points dropped).
std::vector<MaskPixel> convex_hull_2d(std::span<const MaskPixel> pixels);

/// Largest squared pairwise distance of a lattice point set, via hull + rotating calipers.
/// Integer arithmetic throughout, so the result is exact.
std::int64_t squared_diameter_2d(std::span<const MaskPixel> pixels);

/// Largest pairwise distance of a point cloud.
///
/// Below 64 points this is the O(n^2) scan. Otherwise an incremental 3D hull
/// discards points that lie strictly inside it by a safe margin, and the O(n^2)
/// scan runs over the survivors. Any numerical trouble in the hull falls back
/// to the full scan, so the result always equals brute_force_diameter_3d.
double diameter_3d(std::span<const Point3> points);

double brute_force_diameter_3d(std::span<const Point3> points);

/// Indices that can still be diameter endpoints: hull vertices plus points
/// within a conservative band of the hull surface. Exposed for tests.
std::vector<std::size_t> diameter_candidates_3d(std::span<const Point3> points);

}  // namespace fruitsize
