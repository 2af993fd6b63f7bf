#pragma once

// Direct evaluator used as an oracle: builds the full precision/recall list and
// interpolates by scanning it for every recall point.

#include "fruitsize/detection_eval.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace testing_support {

inline double box_iou(const fruitsize::BoundingBox& a, const fruitsize::BoundingBox& b) {
    const double iw = std::max(0.0, std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min));
    const double ih = std::max(0.0, std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min));
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

struct OracleAp {
    double ap = -1.0;
    double recall = -1.0;
};

inline OracleAp oracle_ap(const std::vector<fruitsize::ImageDetections>& images, fruitsize::Ripeness label, double t) {
    struct Hit {
        double score;
        bool tp;
    };
    std::vector<Hit> hits;
    int n_gt = 0;
    for (const auto& img : images) {
        std::vector<fruitsize::BoundingBox> gts;
        for (const auto& g : img.ground_truths)
            if (g.label == label) gts.push_back(g.box);
        n_gt += static_cast<int>(gts.size());
        std::vector<fruitsize::DetectionRecord> dets;
        for (const auto& d : img.detections)
            if (d.label == label) dets.push_back(d);
        std::sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
        std::vector<bool> used(gts.size(), false);
        for (const auto& d : dets) {
            int pick = -1;
            double pick_iou = 0.0;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                const double o = box_iou(d.box, gts[g]);
                if (!used[g] && o >= t && o > pick_iou) {
                    pick = static_cast<int>(g);
                    pick_iou = o;
                }
            }
            if (pick >= 0) used[pick] = true;
            hits.push_back({d.score, pick >= 0});
        }
    }
    if (n_gt == 0) return {};
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.score > b.score; });
    std::vector<double> prec, rec;
    int tp = 0;
    for (std::size_t k = 0; k < hits.size(); ++k) {
        tp += hits[k].tp;
        prec.push_back(double(tp) / double(k + 1));
        rec.push_back(double(tp) / double(n_gt));
    }
    double sum = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        double best = 0.0;
        for (std::size_t k = 0; k < prec.size(); ++k)
            if (rec[k] >= r) best = std::max(best, prec[k]);
        sum += best;
    }
    return {sum / 101.0, rec.empty() ? 0.0 : rec.back()};
}

inline fruitsize::DetectionMetrics oracle_metrics(const std::vector<fruitsize::ImageDetections>& images) {
    fruitsize::DetectionMetrics m;
    int classes = 0;
    for (auto label : {fruitsize::Ripeness::Ripe, fruitsize::Ripeness::Unripe}) {
        if (oracle_ap(images, label, 0.5).ap < 0) continue;
        ++classes;
        m.map50 += oracle_ap(images, label, 0.5).ap;
        m.map75 += oracle_ap(images, label, 0.75).ap;
        double ap = 0.0, rec = 0.0;
        for (int i = 0; i < 10; ++i) {
            const auto o = oracle_ap(images, label, (50 + 5 * i) / 100.0);
            ap += o.ap;
            rec += o.recall;
        }
        m.map50_95 += ap / 10.0;
        m.mar += rec / 10.0;
    }
    if (classes) {
        m.map50 *= 100.0 / classes;
        m.map75 *= 100.0 / classes;
        m.map50_95 *= 100.0 / classes;
        m.mar *= 100.0 / classes;
    }
    return m;
}

/// Up to five ground truths per frame and up to ten detections, most of them
/// jittered copies of a ground truth. Scores are continuous, so ties do not occur.
inline std::vector<fruitsize::ImageDetections> random_frames(std::mt19937_64& rng, int n_frames) {
    std::uniform_int_distribution<int> count(0, 5), coord(0, 40), size(4, 14), cls(0, 1), jitter(-3, 3), pick(0, 2);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<fruitsize::ImageDetections> out(n_frames);
    for (auto& img : out) {
        const int n_gt = count(rng);
        for (int i = 0; i < n_gt; ++i) {
            const double u = coord(rng), v = coord(rng);
            img.ground_truths.push_back({{u, v, u + size(rng), v + size(rng)}, cls(rng) ? fruitsize::Ripeness::Ripe : fruitsize::Ripeness::Unripe});
        }
        const int n_det = std::min(10, count(rng) + count(rng));
        for (int i = 0; i < n_det; ++i) {
            fruitsize::BoundingBox b;
            if (!img.ground_truths.empty() && pick(rng) > 0) {
                const auto& g = img.ground_truths[rng() % img.ground_truths.size()].box;
                b = {g.u_min + jitter(rng), g.v_min + jitter(rng), g.u_max + jitter(rng), g.v_max + jitter(rng)};
                if (b.u_max <= b.u_min) b.u_max = b.u_min + 1;
                if (b.v_max <= b.v_min) b.v_max = b.v_min + 1;
            } else {
                const double u = coord(rng), v = coord(rng);
                b = {u, v, u + size(rng), v + size(rng)};
            }
            img.detections.push_back({"r", b, cls(rng) ? fruitsize::Ripeness::Ripe : fruitsize::Ripeness::Unripe, score(rng)});
        }
    }
    return out;
}

/// Single-class frame with five ground truths and seven detections whose
/// precision/recall curve is worked out by hand in the tests.
inline fruitsize::ImageDetections handcrafted_frame() {
    using fruitsize::Ripeness;
    fruitsize::ImageDetections img;
    for (int i = 1; i <= 5; ++i) img.ground_truths.push_back({{100.0 * i, 0, 100.0 * i + 10, 10}, Ripeness::Ripe});
    const auto det = [](double u, double v, double score) {
        return fruitsize::DetectionRecord{"hand", {u, v, u + 10, v + 10}, Ripeness::Ripe, score};
    };
    img.detections = {
        det(100, 0, 0.95),  // G1 exact, IoU 1
        det(202, 0, 0.90),  // G2, IoU 80/120
        det(900, 900, 0.85),  // nothing
        det(301, 0, 0.80),  // G3, IoU 90/110
        det(101, 0, 0.70),  // duplicate on G1
        det(404, 0, 0.60),  // G4, IoU 60/140
        det(503, 0, 0.50),  // G5, IoU 70/130
    };
    return img;
}

}  // namespace testing_support
