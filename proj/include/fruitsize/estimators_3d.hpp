#pragma once

#include "fruitsize/camera.hpp"

#include <cstdint>
#include <span>

namespace fruitsize {

struct SphereFit {
    Point3 center;
    double radius = 0.0;
    /// Points within the RANSAC inlier band of the returned sphere (all points for plain fits).
    std::size_t inlier_count = 0;
    /// RMS of geometric residuals |p - center| - radius over the points the sphere was fitted to.
    double residual_rms = 0.0;
    int iterations_used = 0;
    bool converged = false;

    double diameter() const { return 2.0 * radius; }
};

struct RansacConfig {
    explicit RansacConfig(std::uint64_t seed_) : seed(seed_) {}

    double delta = 3.0;
    int max_iterations = 500;
    double inlier_ratio_threshold = 0.9;
    std::uint64_t seed;
    /// Least-squares refit on the winning inlier set.
    bool refit = true;

    void validate() const;
};

struct LsqOptions {
    int max_iterations = 100;
    double initial_damping = 1e-3;
    double relative_tolerance = 1e-9;
};

/// Largest segment in the cloud (mm). Throws Error(InsufficientPoints) below two points.
double estimate_3d_lseg(std::span<const Point3> points);
inline double estimate_3d_lseg(const FruitPointCloud& cloud) { return estimate_3d_lseg(cloud.points); }

/// Circumsphere of four points. Throws Error(DegenerateSample) for (near-)coplanar input.
SphereFit sphere_from_4_points(const Point3& p1, const Point3& p2, const Point3& p3, const Point3& p4);

/// Algebraic sphere cost: sum of (|p - c|^2 - r^2)^2.
double sphere_cost(std::span<const Point3> points, const Point3& center, double radius);

/// Minimizes sphere_cost. Starts from the closed-form linear solution and polishes it with
/// damped Gauss-Newton; `converged` is false if the iteration budget ran out first.
/// Throws Error(InsufficientPoints) below 10 points and Error(DegenerateGeometry) for coplanar clouds.
SphereFit lsq_sphere_fit(std::span<const Point3> points, const LsqOptions& options = {});
inline SphereFit lsq_sphere_fit(const FruitPointCloud& cloud, const LsqOptions& options = {}) {
    return lsq_sphere_fit(cloud.points, options);
}

inline constexpr std::size_t kMinLsqPoints = 10;

/// Four-point RANSAC with inlier test -delta < |p - c| - r < delta.
///
/// Degenerate draws are redrawn without using up an iteration, up to
/// 10 * max_iterations draws in total. The candidate with the most inliers wins
/// (ties: smaller inlier RMS). Stops early once inliers / n exceeds the threshold.
SphereFit ransac_sphere(std::span<const Point3> points, const RansacConfig& config);
inline SphereFit ransac_sphere(const FruitPointCloud& cloud, const RansacConfig& config) {
    return ransac_sphere(cloud.points, config);
}

}  // namespace fruitsize
