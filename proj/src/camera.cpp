#include "fruitsize/camera.hpp"

#include "fruitsize/error.hpp"

#include <cmath>

namespace fruitsize {

void CameraIntrinsics::validate() const {
    if (!(focal_length_px > 0.0) || !std::isfinite(focal_length_px)) {
        throw Error(ErrorCode::InvalidInput, "focal length must be positive, got " +
                                                 std::to_string(focal_length_px));
    }
    if (!(depth_scale > 0.0) || !std::isfinite(depth_scale)) {
        throw Error(ErrorCode::InvalidInput, "depth scale must be positive, got " +
                                                 std::to_string(depth_scale));
    }
    if (!std::isfinite(u0) || !std::isfinite(v0)) {
        throw Error(ErrorCode::InvalidInput, "principal point must be finite");
    }
}

CameraIntrinsics CameraIntrinsics::centered(double focal_length_px, int width, int height,
                                            double depth_scale) {
    CameraIntrinsics k;
    k.focal_length_px = focal_length_px;
    k.u0 = 0.5 * (width - 1);
    k.v0 = 0.5 * (height - 1);
    k.depth_scale = depth_scale;
    k.validate();
    return k;
}

double pixel_to_metric(double length_px, double mean_depth_mm, const CameraIntrinsics& intrinsics) {
    intrinsics.validate();
    if (!(length_px >= 0.0)) {
        throw Error(ErrorCode::InvalidInput, "pixel length must be non-negative");
    }
    if (!(mean_depth_mm > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "mean depth must be positive, got " +
                                                 std::to_string(mean_depth_mm));
    }
    return length_px * mean_depth_mm / intrinsics.focal_length_px;
}

Point3 back_project(const Pixel& pixel, const CameraIntrinsics& intrinsics) {
    const double f = intrinsics.focal_length_px;
    return {(pixel.u - intrinsics.u0) * pixel.z / f, (pixel.v - intrinsics.v0) * pixel.z / f,
            pixel.z};
}

FruitPointCloud back_project(std::span<const Pixel> pixels, const CameraIntrinsics& intrinsics,
                             std::string source_fruit_id) {
    intrinsics.validate();
    FruitPointCloud cloud;
    cloud.source_fruit_id = std::move(source_fruit_id);
    cloud.points.reserve(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (!(pixels[i].z > 0.0)) {
            throw Error(ErrorCode::InvalidDepth,
                        "pixel at index " + std::to_string(i) + " has non-positive depth");
        }
        cloud.points.push_back(back_project(pixels[i], intrinsics));
    }
    return cloud;
}

Pixel project(const Point3& point, const CameraIntrinsics& intrinsics) {
    intrinsics.validate();
    if (!(point.z > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "cannot project a point with z <= 0");
    }
    const double f = intrinsics.focal_length_px;
    return {intrinsics.u0 + point.x * f / point.z, intrinsics.v0 + point.y * f / point.z, point.z};
}

}  // namespace fruitsize
