#pragma once

#include "fruitsize/camera.hpp"

#include <span>
#include <string>
#include <vector>

namespace fruitsize {

/// Band of sorted depth ranks kept by outlier removal, as fractions of the pixel count.
struct RetentionRange {
    double lower = 0.0;
    double upper = 1.0;

    RetentionRange() = default;
    /// Throws Error(InvalidInput) unless 0 <= lower < upper <= 1.
    RetentionRange(double lower, double upper);

    /// "10:90" style label in whole percent.
    std::string label() const;
    /// Parses "10:90" (percent) into a range.
    static RetentionRange parse(const std::string& text);

    bool operator==(const RetentionRange&) const = default;
};

/// {0-100, 5-95, ..., 40-60} percent.
std::vector<RetentionRange> default_retention_grid();

/// Nearest-rank percentile filter on depth.
///
/// Pixels are stable-sorted by z; the pixel of 1-based rank i is kept when
/// ceil(lower * N) <= i <= floor(upper * N). If that band holds no rank the
/// median-rank pixel ((N + 1) / 2) is kept instead, so the result is never
/// empty. Kept pixels are returned in their original order.
std::vector<Pixel> filter_by_depth_percentile(std::span<const Pixel> pixels, RetentionRange range);

/// Arithmetic mean of z. Throws Error(EmptyMask) on empty input.
double mean_depth(std::span<const Pixel> pixels);

}  // namespace fruitsize
