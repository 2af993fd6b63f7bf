#include "fruitsize/mask.hpp"

#include "fruitsize/error.hpp"

#include <algorithm>
#include <cmath>

namespace fruitsize {

namespace {

bool row_major_less(const MaskPixel& a, const MaskPixel& b) {
    return a.v != b.v ? a.v < b.v : a.u < b.u;
}

}  // namespace

void BoundingBox::validate() const {
    const bool finite = std::isfinite(u_min) && std::isfinite(v_min) && std::isfinite(u_max) &&
                        std::isfinite(v_max);
    if (!finite || !(u_max > u_min) || !(v_max > v_min)) {
        throw Error(ErrorCode::InvalidInput, "bounding box must have u_max > u_min and v_max > v_min");
    }
}

FruitMask::FruitMask(std::vector<MaskPixel> pixels) : pixels_(std::move(pixels)) {
    if (pixels_.empty()) {
        throw Error(ErrorCode::EmptyMask, "mask has no pixels");
    }
    std::sort(pixels_.begin(), pixels_.end(), row_major_less);
    pixels_.erase(std::unique(pixels_.begin(), pixels_.end()), pixels_.end());

    extent_ = {pixels_.front().u, pixels_.front().v, pixels_.front().u, pixels_.front().v};
    for (const auto& p : pixels_) {
        extent_.u_min = std::min(extent_.u_min, p.u);
        extent_.u_max = std::max(extent_.u_max, p.u);
        extent_.v_min = std::min(extent_.v_min, p.v);
        extent_.v_max = std::max(extent_.v_max, p.v);
    }
}

bool FruitMask::contains(int u, int v) const {
    return std::binary_search(pixels_.begin(), pixels_.end(), MaskPixel{u, v}, row_major_less);
}

BoundingBox FruitMask::enclosing_box() const {
    return {extent_.u_min - 0.5, extent_.v_min - 0.5, extent_.u_max + 0.5, extent_.v_max + 0.5};
}

FruitMask FruitMask::translated(int du, int dv) const {
    std::vector<MaskPixel> moved;
    moved.reserve(pixels_.size());
    for (const auto& p : pixels_) moved.push_back({p.u + du, p.v + dv});
    return FruitMask(std::move(moved));
}

}  // namespace fruitsize
