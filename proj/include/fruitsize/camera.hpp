#pragma once

#include <span>
#include <string>
#include <vector>

namespace fruitsize {

/// Pinhole intrinsics with a single focal length for both axes.
///
/// Image coordinates are measured relative to the principal point, so a pixel
/// at (u0, v0) back-projects onto the optical axis. Setting the principal point
/// to (0, 0) gives the bare x = u z / f model. Depth is distance along the
/// optical axis (not along the ray); raw depth units times depth_scale gives mm.
struct CameraIntrinsics {
    double focal_length_px = 0.0;
    double u0 = 0.0;
    double v0 = 0.0;
    double depth_scale = 1.0;

    /// Throws Error(InvalidInput) if focal length or depth scale is not positive.
    void validate() const;

    /// Principal point at the image center.
    static CameraIntrinsics centered(double focal_length_px, int width, int height,
                                     double depth_scale = 1.0);

    bool operator==(const CameraIntrinsics&) const = default;
};

/// One image sample: column u, row v, depth z in mm (z == 0 marks invalid depth).
struct Pixel {
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;

    bool operator==(const Pixel&) const = default;
};

/// Camera-frame point in mm: x right, y down, z forward.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Point3&) const = default;
};

struct FruitPointCloud {
    std::vector<Point3> points;
    std::string source_fruit_id;
};

/// Image-plane length to metric length: d_px * mean_depth / f.
double pixel_to_metric(double length_px, double mean_depth_mm, const CameraIntrinsics& intrinsics);

/// Lift every pixel to a camera-frame point. Order is preserved.
/// Throws Error(InvalidDepth) naming the first pixel with z <= 0.
FruitPointCloud back_project(std::span<const Pixel> pixels, const CameraIntrinsics& intrinsics,
                             std::string source_fruit_id = {});

Point3 back_project(const Pixel& pixel, const CameraIntrinsics& intrinsics);

/// Inverse of back_project; u and v are not rounded.
Pixel project(const Point3& point, const CameraIntrinsics& intrinsics);

}  // namespace fruitsize
