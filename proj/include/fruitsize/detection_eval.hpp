#pragma once

#include "fruitsize/dataset.hpp"
#include "fruitsize/mask.hpp"

#include <span>
#include <vector>

namespace fruitsize {

/// Intersection over union of two boxes, in [0, 1].
double iou(const BoundingBox& a, const BoundingBox& b);

struct MatchPair {
    std::size_t detection = 0;
    std::size_t ground_truth = 0;
    double iou = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<std::size_t> unmatched_detections;
    std::vector<std::size_t> unmatched_ground_truths;
};

enum class MatchStrategy {
    /// Detections in descending score order each take the best remaining ground truth.
    Greedy,
    /// Maximum total IoU assignment (for sensitivity checks against greedy).
    Hungarian,
};

/// One-to-one, class-agnostic matching of one frame's detections to its ground truths.
/// A pair requires IoU strictly above `threshold`. Indices refer to the input spans.
MatchResult match_detections(std::span<const DetectionRecord> detections,
                             std::span<const AnnotatedFruit> ground_truths, double threshold,
                             MatchStrategy strategy = MatchStrategy::Greedy);

/// Values on a 0-100 scale.
struct DetectionMetrics {
    double map50 = 0.0;
    double map75 = 0.0;
    double map50_95 = 0.0;
    double mar = 0.0;
};

struct LabeledBox {
    BoundingBox box;
    Ripeness label = Ripeness::Ripe;
};

struct ImageDetections {
    std::vector<DetectionRecord> detections;
    std::vector<LabeledBox> ground_truths;
};

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

/// Average precision for one class at one IoU threshold with 101-point interpolation
/// (a detection matches when IoU >= threshold, at most 100 detections per image).
/// Returns -1 when the class has no ground truth. `recall_out` receives final recall.
double average_precision(std::span<const ImageDetections> images, Ripeness label, double iou_threshold,
                         double* recall_out = nullptr);

/// COCO-style mAP50, mAP75, mAP50:95 and mAR@100 averaged over classes that have ground truth.
DetectionMetrics detection_metrics(std::span<const ImageDetections> images);

}  // namespace fruitsize
