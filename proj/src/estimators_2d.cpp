#include "fruitsize/estimators_2d.hpp"

#include "fruitsize/diameter.hpp"
#include "fruitsize/error.hpp"

#include <algorithm>
#include <cmath>

namespace fruitsize {

double estimate_2d_bbox(const BoundingBox& box) {
    box.validate();
    return std::max(box.height(), box.width());
}

double estimate_2d_lseg(const FruitMask& mask) {
    return std::sqrt(static_cast<double>(squared_diameter_2d(mask.pixels())));
}

void HoughConfig::validate() const {
    if (!(radius_frac_lo > 0.0 && radius_frac_lo < radius_frac_hi)) {
        throw Error(ErrorCode::InvalidInput, "hough radius fractions must satisfy 0 < lo < hi");
    }
    if (!(radius_step > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "hough radius step must be positive");
    }
    if (!(center_dilation >= 0.0)) {
        throw Error(ErrorCode::InvalidInput, "hough center dilation must be non-negative");
    }
}

std::vector<MaskPixel> boundary_pixels(const FruitMask& mask) {
    const auto& ext = mask.extent();
    // Occupancy grid with a one-pixel empty border.
    const int w = ext.width() + 3;
    const int h = ext.height() + 3;
    std::vector<char> grid(static_cast<std::size_t>(w) * h, 0);
    const auto at = [&](int u, int v) -> char& {
        return grid[static_cast<std::size_t>(v - ext.v_min + 1) * w + (u - ext.u_min + 1)];
    };
    for (const auto& p : mask.pixels()) at(p.u, p.v) = 1;

    std::vector<MaskPixel> boundary;
    for (const auto& p : mask.pixels()) {
        if (!at(p.u - 1, p.v) || !at(p.u + 1, p.v) || !at(p.u, p.v - 1) || !at(p.u, p.v + 1)) {
            boundary.push_back(p);
        }
    }
    return boundary;
}

CircleFit estimate_2d_hough(const FruitMask& mask, const HoughConfig& config) {
    config.validate();
    const auto boundary = boundary_pixels(mask);
    if (boundary.size() < config.min_boundary_pixels) {
        throw Error(ErrorCode::InsufficientEvidence,
                    "hough needs at least " + std::to_string(config.min_boundary_pixels) +
                        " boundary pixels, mask has " + std::to_string(boundary.size()));
    }

    const auto& ext = mask.extent();
    const double size = std::max(ext.width(), ext.height());
    const auto r_first = static_cast<int>(std::ceil(config.radius_frac_lo * size / config.radius_step));
    const auto r_last = static_cast<int>(std::floor(config.radius_frac_hi * size / config.radius_step));
    if (r_last < std::max(r_first, 1)) {
        throw Error(ErrorCode::InsufficientEvidence, "mask too small for the hough radius range");
    }
    const int first_bin = std::max(r_first, 1);
    const int bins = r_last - first_bin + 1;

    const int pad_u = static_cast<int>(std::ceil(0.5 * config.center_dilation * ext.width()));
    const int pad_v = static_cast<int>(std::ceil(0.5 * config.center_dilation * ext.height()));

    CircleFit best;
    best.accumulator_score = -1;
    std::vector<int> votes(bins);
    for (int vc = ext.v_min - pad_v; vc <= ext.v_max + pad_v; ++vc) {
        for (int uc = ext.u_min - pad_u; uc <= ext.u_max + pad_u; ++uc) {
            std::fill(votes.begin(), votes.end(), 0);
            for (const auto& b : boundary) {
                const double du = b.u - uc;
                const double dv = b.v - vc;
                const auto bin = static_cast<long>(std::lround(std::sqrt(du * du + dv * dv) / config.radius_step));
                if (bin >= first_bin && bin <= r_last) ++votes[bin - first_bin];
            }
            for (int k = 0; k < bins; ++k) {
                const double radius = (first_bin + k) * config.radius_step;
                const bool better =
                    votes[k] > best.accumulator_score ||
                    (votes[k] == best.accumulator_score &&
                     (radius < best.radius ||
                      (radius == best.radius && (uc < best.u_c || (uc == best.u_c && vc < best.v_c)))));
                if (better) {
                    best = {static_cast<double>(uc), static_cast<double>(vc), radius, votes[k]};
                }
            }
        }
    }
    if (best.accumulator_score <= 0) {
        throw Error(ErrorCode::InsufficientEvidence, "no circle received any votes");
    }
    return best;
}

}  // namespace fruitsize
