#include "fruitsize/statistics.hpp"

#include "fruitsize/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fruitsize {

double interpolated_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::EmptySet, "quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

QuartileSummary quartile_summary(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptySet, "quartile summary of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    QuartileSummary s;
    s.n_total = sorted.size();
    s.q1 = interpolated_quantile(sorted, 0.25);
    s.q2 = interpolated_quantile(sorted, 0.50);
    s.q3 = interpolated_quantile(sorted, 0.75);
    const double iqr = s.q3 - s.q1;
    s.whisker_high = s.q3 + 1.5 * iqr;
    s.whisker_low = s.q1 - 1.5 * iqr;
    s.n_outliers = static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(), [&](double x) {
        return x < s.whisker_low || x > s.whisker_high;
    }));
    return s;
}

}  // namespace fruitsize
