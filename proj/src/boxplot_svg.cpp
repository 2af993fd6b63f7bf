#include "fruitsize/boxplot_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fruitsize {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_boxplot_svg(const std::vector<SummaryEntry>& entries) {
    std::vector<Estimator> panels;
    std::vector<RetentionRange> ranges;
    double lo = 0.0, hi = 0.0;
    for (const auto& e : entries) {
        if (std::find(panels.begin(), panels.end(), e.estimator) == panels.end()) panels.push_back(e.estimator);
        if (std::find(ranges.begin(), ranges.end(), e.retention) == ranges.end()) ranges.push_back(e.retention);
        if (e.summary) {
            lo = std::min(lo, e.summary->whisker_low);
            hi = std::max(hi, e.summary->whisker_high);
        }
    }
    if (hi - lo < 1.0) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const int panel_w = 40 + 22 * static_cast<int>(std::max<std::size_t>(ranges.size(), 1));
    const int plot_h = 320;
    const int top = 30, left = 60, bottom = 70;
    const int width = left + panel_w * static_cast<int>(std::max<std::size_t>(panels.size(), 1)) + 20;
    const int height = top + plot_h + bottom;
    const auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"16\" font-size=\"12\">Diameter error d_est - d_gt (mm)</text>\n";
    svg << "<line x1=\"" << left << "\" x2=\"" << width - 20 << "\" y1=\"" << num(y_of(0.0)) << "\" y2=\""
        << num(y_of(0.0)) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    const double step = std::pow(10.0, std::floor(std::log10(hi - lo)));
    for (double t = std::ceil(lo / step) * step; t <= hi; t += step) {
        svg << "<text x=\"" << left - 6 << "\" y=\"" << num(y_of(t) + 3) << "\" text-anchor=\"end\">" << num(t)
            << "</text>\n";
    }

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const int x0 = left + static_cast<int>(p) * panel_w;
        svg << "<rect x=\"" << x0 << "\" y=\"" << top << "\" width=\"" << panel_w - 6 << "\" height=\"" << plot_h
            << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
        svg << "<text x=\"" << x0 + (panel_w - 6) / 2 << "\" y=\"" << top + plot_h + 50
            << "\" text-anchor=\"middle\" font-size=\"11\">" << to_string(panels[p]) << "</text>\n";
        for (std::size_t r = 0; r < ranges.size(); ++r) {
            const double cx = x0 + 20 + 22.0 * static_cast<double>(r);
            svg << "<text transform=\"translate(" << num(cx + 3) << "," << top + plot_h + 8
                << ") rotate(60)\" font-size=\"8\">" << ranges[r].label() << "</text>\n";
            const auto it = std::find_if(entries.begin(), entries.end(), [&](const SummaryEntry& e) {
                return e.estimator == panels[p] && e.retention == ranges[r];
            });
            if (it == entries.end() || !it->summary) continue;
            const auto& s = *it->summary;
            svg << "<line x1=\"" << num(cx) << "\" x2=\"" << num(cx) << "\" y1=\"" << num(y_of(s.whisker_high))
                << "\" y2=\"" << num(y_of(s.whisker_low)) << "\" stroke=\"black\"/>\n";
            svg << "<rect x=\"" << num(cx - 7) << "\" y=\"" << num(y_of(s.q3)) << "\" width=\"14\" height=\""
                << num(std::max(0.5, y_of(s.q1) - y_of(s.q3))) << "\" fill=\"#8fb8de\" stroke=\"black\"/>\n";
            svg << "<line x1=\"" << num(cx - 7) << "\" x2=\"" << num(cx + 7) << "\" y1=\"" << num(y_of(s.q2))
                << "\" y2=\"" << num(y_of(s.q2)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace fruitsize
