#pragma once

#include "fruitsize/size_sweep.hpp"

#include <string>
#include <vector>

namespace fruitsize {

/// Box-plot grid: one panel per estimator, one box per retention range, drawn
/// from already computed summaries (outliers are not drawn).
std::string render_boxplot_svg(const std::vector<SummaryEntry>& entries);

}  // namespace fruitsize
