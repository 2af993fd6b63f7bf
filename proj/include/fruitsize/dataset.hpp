#pragma once

#include "fruitsize/camera.hpp"
#include "fruitsize/mask.hpp"
#include "fruitsize/raster.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fruitsize {

enum class Ripeness { Ripe, Unripe };

std::string to_string(Ripeness r);
/// Accepts exactly "Ripe" or "Unripe"; throws Error(SchemaError) otherwise.
Ripeness parse_ripeness(const std::string& text);

struct AnnotatedFruit {
    std::string fruit_id;
    BoundingBox box;
    std::optional<FruitMask> mask;
    Ripeness ripeness = Ripeness::Ripe;
    std::optional<double> gt_diameter_mm;

    bool operator==(const AnnotatedFruit&) const = default;
};

struct Frame {
    std::string frame_id;
    /// Raster paths as written in the manifest (relative to the manifest directory).
    std::string rgb_path;
    std::string depth_path;
    int width = 0;
    int height = 0;
    std::shared_ptr<const DepthImage> depth;
    CameraIntrinsics intrinsics;
    std::vector<AnnotatedFruit> fruits;
    std::optional<std::string> capture_date;

    /// Depth in mm, or 0 for invalid/outside pixels.
    double depth_mm(int u, int v) const;
};

struct DetectionRecord {
    std::string frame_id;
    BoundingBox box;
    Ripeness label = Ripeness::Ripe;
    double score = 0.0;

    bool operator==(const DetectionRecord&) const = default;
};

inline constexpr int kManifestSchemaVersion = 1;

/// Reads and fully validates a manifest, decoding every referenced raster.
/// Ground-truth diameters outside 20-120 mm append to `warnings`; outside 5-300 mm they are errors.
std::vector<Frame> load_manifest(const std::filesystem::path& path,
                                 std::vector<std::string>* warnings = nullptr);

/// Writes the manifest document only; rasters must already exist next to it. Masks are stored as RLE.
void save_manifest(const std::filesystem::path& path, const std::vector<Frame>& frames);

/// Reads a detection array. With `frames`, unknown frame ids are a referential error.
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path,
                                             const std::vector<Frame>* frames = nullptr);
void save_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& detections);

std::map<std::string, std::vector<DetectionRecord>> group_by_frame(const std::vector<DetectionRecord>& detections);

/// Valid-depth pixels of a mask (z in mm), in mask order.
std::vector<Pixel> mask_depth_pixels(const Frame& frame, const FruitMask& mask);

/// Depth-band segmentation used when no mask is annotated. This is a stand-in,
/// not a learned segmenter: it keeps valid pixels in the box within +/-10% of
/// their median depth and returns the largest 4-connected component.
FruitMask fallback_segment(const Frame& frame, const BoundingBox& box);

}  // namespace fruitsize
