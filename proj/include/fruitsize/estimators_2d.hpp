#pragma once

#include "fruitsize/mask.hpp"

#include <vector>

namespace fruitsize {

/// Diameter in pixels from a detection box: max(height, width).
double estimate_2d_bbox(const BoundingBox& box);

/// Largest pixel-to-pixel distance inside the mask (pixel centers as lattice points).
double estimate_2d_lseg(const FruitMask& mask);

struct HoughConfig {
    /// Radius search range as fractions of max(h, w) of the mask extent.
    double radius_frac_lo = 0.25;
    double radius_frac_hi = 0.75;
    /// Radius bin width in pixels.
    double radius_step = 1.0;
    /// Center search window: mask extent grown by this fraction of its size (split across both sides).
    double center_dilation = 0.25;
    std::size_t min_boundary_pixels = 8;

    void validate() const;
};

struct CircleFit {
    double u_c = 0.0;
    double v_c = 0.0;
    double radius = 0.0;
    int accumulator_score = 0;

    double diameter() const { return 2.0 * radius; }
};

/// Mask pixels with at least one 4-neighbor outside the mask, in row-major order.
std::vector<MaskPixel> boundary_pixels(const FruitMask& mask);

/// Circle Hough transform over the mask boundary.
///
/// Every boundary pixel votes once per candidate center for the radius bin
/// nearest to its distance. The (center, radius) cell with the most votes wins;
/// ties go to the smaller radius, then the smaller (u_c, v_c).
/// Throws Error(InsufficientEvidence) with fewer than min_boundary_pixels boundary pixels.
CircleFit estimate_2d_hough(const FruitMask& mask, const HoughConfig& config = {});

}  // namespace fruitsize
