#pragma once

#include "fruitsize/dataset.hpp"
#include "fruitsize/estimators_2d.hpp"
#include "fruitsize/estimators_3d.hpp"
#include "fruitsize/filtering.hpp"
#include "fruitsize/statistics.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fruitsize {

enum class Estimator { BBox2D, LSeg2D, HT2D, LSeg3D, LSq3D, RANSAC3D };

std::string to_string(Estimator e);
/// Accepts the canonical names (e.g. "LSeg2D"); throws Error(InvalidInput) otherwise.
Estimator parse_estimator(const std::string& name);
std::vector<Estimator> all_estimators();
bool is_3d(Estimator e);

struct SizeErrorRecord {
    enum class Status { Ok, Skipped };

    std::string frame_id;
    std::string fruit_id;
    Estimator estimator = Estimator::BBox2D;
    RetentionRange retention;
    double d_est = 0.0;
    double d_gt = 0.0;
    /// d_est - d_gt
    double error = 0.0;
    Status status = Status::Ok;
    std::string skip_reason;

    bool ok() const { return status == Status::Ok; }
};

struct SweepConfig {
    std::vector<Estimator> estimators = all_estimators();
    std::vector<RetentionRange> retention = default_retention_grid();
    HoughConfig hough;
    double ransac_delta = 3.0;
    int ransac_iterations = 500;
    double ransac_threshold = 0.9;
    bool ransac_refit = true;
    std::uint64_t seed = 0;
    int jobs = 1;
};

/// One fruit to size. `box` overrides the annotated box for the 2D-BBox estimator
/// (detected boxes); masks always come from the fruit or the fallback segmenter.
struct SweepTarget {
    const Frame* frame = nullptr;
    const AnnotatedFruit* fruit = nullptr;
    std::optional<BoundingBox> box;
};

/// Per-fruit RANSAC seed: global seed XOR FNV-1a hash of the fruit id.
std::uint64_t fruit_seed(std::uint64_t global_seed, const std::string& fruit_id);

/// Runs every (fruit, estimator, retention) combination. Output order is fruit
/// order, then estimator order, then retention order, independent of `jobs`.
/// Estimation failures become Skipped records carrying the reason.
std::vector<SizeErrorRecord> run_size_sweep(const std::vector<SweepTarget>& targets, const SweepConfig& config);

/// Sweeps every fruit with a ground-truth diameter.
std::vector<SizeErrorRecord> run_size_sweep(const std::vector<Frame>& frames, const SweepConfig& config);

void write_records_csv(std::ostream& out, const std::vector<SizeErrorRecord>& records);

struct SummaryEntry {
    Estimator estimator = Estimator::BBox2D;
    RetentionRange retention;
    std::optional<QuartileSummary> summary;
    std::size_t n_skipped = 0;
};

/// Quartile summary of signed errors per (estimator, retention), in first-seen order.
std::vector<SummaryEntry> summarize(const std::vector<SizeErrorRecord>& records);

void write_summary_json(std::ostream& out, const std::vector<SummaryEntry>& entries);
std::vector<SummaryEntry> read_summary_json(std::istream& in);

}  // namespace fruitsize
