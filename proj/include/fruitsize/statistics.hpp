#pragma once

#include <cstddef>
#include <span>

namespace fruitsize {

/// Box-plot statistics. Quartiles interpolate linearly between closest ranks
/// (position q * (n - 1) in the sorted sample). Whiskers sit at 1.5 IQR beyond
/// the box; values strictly outside them are counted as outliers.
struct QuartileSummary {
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::size_t n_outliers = 0;
    std::size_t n_total = 0;

    double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quantile of an ascending sample, q in [0, 1].
double interpolated_quantile(std::span<const double> sorted, double q);

/// Throws Error(EmptySet) on empty input.
QuartileSummary quartile_summary(std::span<const double> values);

}  // namespace fruitsize
