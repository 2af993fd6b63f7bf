#include "fruitsize/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fruitsize {

namespace {

constexpr std::size_t kMaxDetectionsPerImage = 100;
constexpr int kRecallPoints = 101;

// Shortest augmenting path Hungarian algorithm; rows <= cols, minimizes cost.
// Returns, for every row, the assigned column.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    const std::size_t m = n == 0 ? 0 : cost[0].size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) assignment[p[j] - 1] = j - 1;
    }
    return assignment;
}

std::vector<std::size_t> by_descending_score(std::span<const DetectionRecord> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    return order;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min);
    const double ih = std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

MatchResult match_detections(std::span<const DetectionRecord> detections,
                             std::span<const AnnotatedFruit> ground_truths, double threshold,
                             MatchStrategy strategy) {
    const std::size_t nd = detections.size();
    const std::size_t ng = ground_truths.size();
    std::vector<std::vector<double>> overlap(nd, std::vector<double>(ng, 0.0));
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t g = 0; g < ng; ++g) overlap[d][g] = iou(detections[d].box, ground_truths[g].box);
    }

    std::vector<char> det_used(nd, 0), gt_used(ng, 0);
    MatchResult result;
    if (strategy == MatchStrategy::Greedy) {
        for (std::size_t d : by_descending_score(detections)) {
            std::size_t best_g = ng;
            double best_iou = threshold;
            for (std::size_t g = 0; g < ng; ++g) {
                if (!gt_used[g] && overlap[d][g] > best_iou) {
                    best_iou = overlap[d][g];
                    best_g = g;
                }
            }
            if (best_g < ng) {
                det_used[d] = gt_used[best_g] = 1;
                result.pairs.push_back({d, best_g, best_iou});
            }
        }
    } else if (nd > 0 && ng > 0) {
        const bool det_rows = nd <= ng;
        const std::size_t rows = det_rows ? nd : ng;
        const std::size_t cols = det_rows ? ng : nd;
        std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, 0.0));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const double o = det_rows ? overlap[r][c] : overlap[c][r];
                cost[r][c] = o > threshold ? -o : 0.0;
            }
        }
        const auto assignment = hungarian(cost);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t d = det_rows ? r : assignment[r];
            const std::size_t g = det_rows ? assignment[r] : r;
            if (overlap[d][g] > threshold) {
                det_used[d] = gt_used[g] = 1;
                result.pairs.push_back({d, g, overlap[d][g]});
            }
        }
        std::sort(result.pairs.begin(), result.pairs.end(),
                  [](const MatchPair& a, const MatchPair& b) { return a.detection < b.detection; });
    }
    for (std::size_t d = 0; d < nd; ++d) {
        if (!det_used[d]) result.unmatched_detections.push_back(d);
    }
    for (std::size_t g = 0; g < ng; ++g) {
        if (!gt_used[g]) result.unmatched_ground_truths.push_back(g);
    }
    return result;
}

std::vector<double> coco_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
    return t;
}

double average_precision(std::span<const ImageDetections> images, Ripeness label, double iou_threshold,
                         double* recall_out) {
    struct Scored {
        double score;
        bool true_positive;
    };
    std::vector<Scored> scored;
    std::size_t positives = 0;
    for (const auto& image : images) {
        std::vector<const LabeledBox*> gts;
        for (const auto& g : image.ground_truths) {
            if (g.label == label) gts.push_back(&g);
        }
        positives += gts.size();

        std::vector<DetectionRecord> dets;
        for (const auto& d : image.detections) {
            if (d.label == label) dets.push_back(d);
        }
        auto order = by_descending_score(dets);
        if (order.size() > kMaxDetectionsPerImage) order.resize(kMaxDetectionsPerImage);

        std::vector<char> taken(gts.size(), 0);
        for (std::size_t d : order) {
            std::size_t best = gts.size();
            double best_iou = -1.0;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (taken[g]) continue;
                const double o = iou(dets[d].box, gts[g]->box);
                if (o >= iou_threshold && o > best_iou) {
                    best_iou = o;
                    best = g;
                }
            }
            if (best < gts.size()) taken[best] = 1;
            scored.push_back({dets[d].score, best < gts.size()});
        }
    }
    if (positives == 0) {
        if (recall_out) *recall_out = -1.0;
        return -1.0;
    }

    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.score > b.score; });
    std::vector<double> precision(scored.size()), recall(scored.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < scored.size(); ++k) {
        tp += scored[k].true_positive ? 1 : 0;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
        recall[k] = static_cast<double>(tp) / static_cast<double>(positives);
    }
    if (recall_out) *recall_out = recall.empty() ? 0.0 : recall.back();
    // Precision envelope: best precision at any equal-or-higher recall.
    for (std::size_t k = precision.size(); k-- > 1;) {
        precision[k - 1] = std::max(precision[k - 1], precision[k]);
    }
    double sum = 0.0;
    for (int i = 0; i < kRecallPoints; ++i) {
        const double r = i / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    return sum / kRecallPoints;
}

DetectionMetrics detection_metrics(std::span<const ImageDetections> images) {
    const auto thresholds = coco_iou_thresholds();
    DetectionMetrics m;
    int classes = 0;
    for (Ripeness label : {Ripeness::Ripe, Ripeness::Unripe}) {
        double recall_sum = 0.0;
        double ap_sum = 0.0;
        bool has_gt = true;
        for (double t : thresholds) {
            double recall = 0.0;
            const double ap = average_precision(images, label, t, &recall);
            if (ap < 0.0) {
                has_gt = false;
                break;
            }
            ap_sum += ap;
            recall_sum += recall;
            if (t == 0.5) m.map50 += ap;
            if (t == 0.75) m.map75 += ap;
        }
        if (!has_gt) continue;
        ++classes;
        m.map50_95 += ap_sum / static_cast<double>(thresholds.size());
        m.mar += recall_sum / static_cast<double>(thresholds.size());
    }
    if (classes > 0) {
        const double scale = 100.0 / classes;
        m.map50 *= scale;
        m.map75 *= scale;
        m.map50_95 *= scale;
        m.mar *= scale;
    }
    return m;
}

}  // namespace fruitsize
