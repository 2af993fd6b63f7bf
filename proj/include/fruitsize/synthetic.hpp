#pragma once

#include "fruitsize/dataset.hpp"
#include "fruitsize/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fruitsize {

/// Parameters of a rendered test scene: spheres in front of a flat background.
struct SceneSpec {
    std::string frame_id = "synthetic";
    int n_fruits = 6;
    double diameter_min_mm = 40.0;
    double diameter_max_mm = 95.0;
    /// Range for sphere-center depth.
    double depth_min_mm = 1000.0;
    double depth_max_mm = 1500.0;
    /// Gaussian depth noise on every valid pixel.
    double noise_sigma_mm = 0.0;
    /// Fraction of the diameter hidden by an occluder that truncates a spherical cap
    /// along a random image-plane direction (0.5 hides half the sphere).
    double occlusion_fraction = 0.0;
    /// Fraction of in-mask depths replaced by uniform clutter between the fruit front and the background.
    double outlier_fraction = 0.0;
    std::uint64_t seed = 0;

    int width = 640;
    int height = 480;
    double focal_length_px = 600.0;
    double depth_scale = 0.1;
    /// Background plane distance beyond the farthest allowed sphere center.
    double background_offset_mm = 500.0;
    /// Sphere centers stay within this angle of the optical axis.
    double max_off_axis_deg = 25.0;
    /// Minimum gap between fruit silhouettes.
    int separation_px = 3;
    int max_placement_attempts = 2000;

    void validate() const;
};

struct SphereTruth {
    std::string fruit_id;
    Point3 center;
    double radius_mm = 0.0;
    /// Unit image-plane direction of the occluded cap (zero when unoccluded).
    double occlusion_dir_u = 0.0;
    double occlusion_dir_v = 0.0;
};

struct SyntheticScene {
    Frame frame;
    ByteImage rgb;
    DepthImage depth;
    std::vector<SphereTruth> spheres;
};

/// Deterministic for a given spec. Throws Error(PlacementError) if the fruits cannot be
/// placed without overlapping silhouettes.
SyntheticScene generate_synthetic_scene(const SceneSpec& spec);

/// Writes `<id>_rgb.png`, `<id>_depth.png` per scene and `manifest.json` into `dir`.
/// Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const std::vector<SyntheticScene>& scenes);

}  // namespace fruitsize
