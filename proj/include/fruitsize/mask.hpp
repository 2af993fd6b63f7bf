#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fruitsize {

/// Axis-aligned box in image coordinates. Pixel centers sit on integer
/// coordinates, so a box drawn around pixel columns a..b spans [a - 0.5, b + 0.5].
struct BoundingBox {
    double u_min = 0.0;
    double v_min = 0.0;
    double u_max = 0.0;
    double v_max = 0.0;

    double width() const { return u_max - u_min; }
    double height() const { return v_max - v_min; }
    double area() const { return width() * height(); }
    bool contains(double u, double v) const {
        return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
    }
    /// Throws Error(InvalidInput) unless u_max > u_min and v_max > v_min (all finite).
    void validate() const;

    bool operator==(const BoundingBox&) const = default;
};

struct MaskPixel {
    int u = 0;
    int v = 0;

    auto operator<=>(const MaskPixel&) const = default;
};

/// Inclusive integer extent of a pixel set.
struct PixelExtent {
    int u_min = 0;
    int v_min = 0;
    int u_max = 0;
    int v_max = 0;

    int width() const { return u_max - u_min; }
    int height() const { return v_max - v_min; }
};

/// Non-empty set of lattice pixels, kept sorted row-major (v, then u) without duplicates.
class FruitMask {
public:
    /// Throws Error(EmptyMask) when `pixels` is empty. Duplicates are dropped.
    explicit FruitMask(std::vector<MaskPixel> pixels);

    std::span<const MaskPixel> pixels() const { return pixels_; }
    std::size_t size() const { return pixels_.size(); }
    const PixelExtent& extent() const { return extent_; }
    bool contains(int u, int v) const;
    /// Pixel-edge box around the mask: [u_min - 0.5, v_min - 0.5, u_max + 0.5, v_max + 0.5].
    BoundingBox enclosing_box() const;
    FruitMask translated(int du, int dv) const;

    bool operator==(const FruitMask& other) const { return pixels_ == other.pixels_; }

private:
    std::vector<MaskPixel> pixels_;
    PixelExtent extent_;
};

}  // namespace fruitsize
