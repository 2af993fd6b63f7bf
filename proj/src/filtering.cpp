#include "fruitsize/filtering.hpp"

#include "fruitsize/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fruitsize {

namespace {

// Absorbs representation error in products such as 0.7 * 10.
constexpr double kRankSlack = 1e-9;

}  // namespace

RetentionRange::RetentionRange(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
        throw Error(ErrorCode::InvalidInput, "retention range must satisfy 0 <= lower < upper <= 1");
    }
}

std::string RetentionRange::label() const {
    const auto pct = [](double f) { return std::to_string(static_cast<int>(std::lround(f * 100.0))); };
    return pct(lower) + ":" + pct(upper);
}

RetentionRange RetentionRange::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw Error(ErrorCode::InvalidInput, "retention range must look like LO:HI, got '" + text + "'");
    }
    try {
        std::size_t used_lo = 0;
        std::size_t used_hi = 0;
        const std::string lo_text = text.substr(0, colon);
        const std::string hi_text = text.substr(colon + 1);
        const double lo = std::stod(lo_text, &used_lo);
        const double hi = std::stod(hi_text, &used_hi);
        if (used_lo != lo_text.size() || used_hi != hi_text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return RetentionRange(lo / 100.0, hi / 100.0);
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidInput, "retention range must look like LO:HI, got '" + text + "'");
    }
}

std::vector<RetentionRange> default_retention_grid() {
    std::vector<RetentionRange> grid;
    for (int lo = 0; lo <= 40; lo += 5) {
        grid.emplace_back(lo / 100.0, (100 - lo) / 100.0);
    }
    return grid;
}

std::vector<Pixel> filter_by_depth_percentile(std::span<const Pixel> pixels, RetentionRange range) {
    if (pixels.empty()) {
        throw Error(ErrorCode::EmptyMask, "cannot filter an empty pixel set");
    }
    const std::size_t n = pixels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pixels[a].z < pixels[b].z; });

    const auto count = static_cast<double>(n);
    auto first_rank = static_cast<std::size_t>(std::max(1.0, std::ceil(range.lower * count - kRankSlack)));
    auto last_rank = static_cast<std::size_t>(std::floor(range.upper * count + kRankSlack));
    last_rank = std::min(last_rank, n);
    if (first_rank > last_rank) {
        first_rank = last_rank = (n + 1) / 2;
    }

    std::vector<char> keep(n, 0);
    for (std::size_t rank = first_rank; rank <= last_rank; ++rank) {
        keep[order[rank - 1]] = 1;
    }
    std::vector<Pixel> kept;
    kept.reserve(last_rank - first_rank + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) kept.push_back(pixels[i]);
    }
    return kept;
}

double mean_depth(std::span<const Pixel> pixels) {
    if (pixels.empty()) {
        throw Error(ErrorCode::EmptyMask, "cannot average depth over an empty pixel set");
    }
    double sum = 0.0;
    for (const auto& p : pixels) sum += p.z;
    return sum / static_cast<double>(pixels.size());
}

}  // namespace fruitsize
