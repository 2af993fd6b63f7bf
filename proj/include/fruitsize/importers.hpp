#pragma once

#include "fruitsize/camera.hpp"
#include "fruitsize/dataset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fruitsize {

/// Best-effort conversion of COCO-style annotation exports into a manifest.
/// Not part of the estimation core; the public datasets' native layouts vary
/// between releases, so everything layout-specific is an option here.
struct CocoImportOptions {
    std::filesystem::path annotations;
    /// Directory holding the RGB files named in images[].file_name.
    std::filesystem::path rgb_dir;
    /// Directory holding 16-bit depth PNGs named <rgb stem><depth_suffix>.
    std::filesystem::path depth_dir;
    std::string depth_suffix = ".png";
    /// Never guessed: the caller supplies the camera.
    CameraIntrinsics intrinsics;
    /// Optional CSV with header "annotation_id,diameter_mm".
    std::optional<std::filesystem::path> diameters_csv;
    /// Import polygon / uncompressed-RLE masks. Keys tried in order.
    bool import_masks = true;
    std::vector<std::string> mask_keys = {"segmentation"};
    /// Used when the category name says neither ripe nor unripe.
    Ripeness default_ripeness = Ripeness::Ripe;
};

/// Writes `out_dir/manifest.json` (rasters are referenced in place) and returns
/// the validated frames. Skipped annotations are reported through `warnings`.
std::vector<Frame> import_coco_dataset(const CocoImportOptions& options, const std::filesystem::path& out_dir,
                                       std::vector<std::string>* warnings = nullptr);

/// Presets for the two public apple datasets: box-only annotations, and
/// modal/amodal masks where only the modal (visible) mask is used.
CocoImportOptions openaccess_preset();
CocoImportOptions amodal_preset();

}  // namespace fruitsize
