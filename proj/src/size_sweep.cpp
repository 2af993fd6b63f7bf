#include "fruitsize/size_sweep.hpp"

#include "fruitsize/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <functional>
#include <istream>
#include <iterator>
#include <ostream>
#include <thread>

namespace fruitsize {

namespace {

constexpr std::array<Estimator, 6> kAll = {Estimator::BBox2D, Estimator::LSeg2D, Estimator::HT2D,
                                          Estimator::LSeg3D, Estimator::LSq3D, Estimator::RANSAC3D};

// Either a value or the reason it could not be computed.
struct Outcome {
    double value = 0.0;
    std::string failure;

    template <typename Fn>
    static Outcome attempt(Fn&& fn) {
        try {
            return {fn(), {}};
        } catch (const Error& e) {
            return {0.0, e.what()};
        }
    }
};

std::vector<SizeErrorRecord> sweep_one(const SweepTarget& target, const SweepConfig& config) {
    const Frame& frame = *target.frame;
    const AnnotatedFruit& fruit = *target.fruit;
    const double d_gt = fruit.gt_diameter_mm.value_or(0.0);
    const std::size_t n_est = config.estimators.size();
    const std::size_t n_ret = config.retention.size();

    // Indexed [estimator][retention].
    std::vector<SizeErrorRecord> records(n_est * n_ret);
    for (std::size_t e = 0; e < n_est; ++e) {
        for (std::size_t r = 0; r < n_ret; ++r) {
            auto& rec = records[e * n_ret + r];
            rec.frame_id = frame.frame_id;
            rec.fruit_id = fruit.fruit_id;
            rec.estimator = config.estimators[e];
            rec.retention = config.retention[r];
            rec.d_gt = d_gt;
        }
    }
    const auto skip_all = [&](const std::string& reason) {
        for (auto& rec : records) {
            rec.status = SizeErrorRecord::Status::Skipped;
            rec.skip_reason = reason;
        }
        return records;
    };

    std::optional<FruitMask> mask = fruit.mask;
    if (!mask) {
        try {
            mask = fallback_segment(frame, target.box.value_or(fruit.box));
        } catch (const Error& e) {
            return skip_all(e.what());
        }
    }
    const std::vector<Pixel> depth_pixels = mask_depth_pixels(frame, *mask);
    if (depth_pixels.empty()) return skip_all("empty-mask: no valid depth inside the mask");

    // Image-plane diameters do not depend on the retention range.
    const Outcome bbox_px = Outcome::attempt([&] { return estimate_2d_bbox(target.box.value_or(fruit.box)); });
    const Outcome lseg_px = Outcome::attempt([&] { return estimate_2d_lseg(*mask); });
    std::optional<Outcome> hough_px;

    RansacConfig ransac(fruit_seed(config.seed, fruit.fruit_id));
    ransac.delta = config.ransac_delta;
    ransac.max_iterations = config.ransac_iterations;
    ransac.inlier_ratio_threshold = config.ransac_threshold;
    ransac.refit = config.ransac_refit;

    for (std::size_t r = 0; r < n_ret; ++r) {
        const std::vector<Pixel> kept = filter_by_depth_percentile(depth_pixels, config.retention[r]);
        const double z_bar = mean_depth(kept);
        std::optional<FruitPointCloud> cloud;

        for (std::size_t e = 0; e < n_est; ++e) {
            Outcome out;
            const auto to_mm = [&](const Outcome& px) {
                if (!px.failure.empty()) return px;
                return Outcome::attempt([&] { return pixel_to_metric(px.value, z_bar, frame.intrinsics); });
            };
            switch (config.estimators[e]) {
                case Estimator::BBox2D:
                    out = to_mm(bbox_px);
                    break;
                case Estimator::LSeg2D:
                    out = to_mm(lseg_px);
                    break;
                case Estimator::HT2D:
                    if (!hough_px) {
                        hough_px = Outcome::attempt([&] { return estimate_2d_hough(*mask, config.hough).diameter(); });
                    }
                    out = to_mm(*hough_px);
                    break;
                case Estimator::LSeg3D:
                case Estimator::LSq3D:
                case Estimator::RANSAC3D:
                    if (!cloud) cloud = back_project(kept, frame.intrinsics, fruit.fruit_id);
                    if (config.estimators[e] == Estimator::LSeg3D) {
                        out = Outcome::attempt([&] { return estimate_3d_lseg(*cloud); });
                    } else if (config.estimators[e] == Estimator::LSq3D) {
                        out = Outcome::attempt([&] { return lsq_sphere_fit(*cloud).diameter(); });
                    } else {
                        out = Outcome::attempt([&] { return ransac_sphere(*cloud, ransac).diameter(); });
                    }
                    break;
            }
            auto& rec = records[e * n_ret + r];
            if (out.failure.empty()) {
                rec.d_est = out.value;
                rec.error = rec.d_est - rec.d_gt;
            } else {
                rec.status = SizeErrorRecord::Status::Skipped;
                rec.skip_reason = out.failure;
            }
        }
    }
    return records;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", fraction * 100.0);
    return buf;
}

}  // namespace

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::BBox2D: return "BBox2D";
        case Estimator::LSeg2D: return "LSeg2D";
        case Estimator::HT2D: return "HT2D";
        case Estimator::LSeg3D: return "LSeg3D";
        case Estimator::LSq3D: return "LSq3D";
        case Estimator::RANSAC3D: return "RANSAC3D";
    }
    return "unknown";
}

Estimator parse_estimator(const std::string& name) {
    for (Estimator e : kAll) {
        if (to_string(e) == name) return e;
    }
    throw Error(ErrorCode::InvalidInput, "unknown estimator '" + name + "'");
}

std::vector<Estimator> all_estimators() { return {kAll.begin(), kAll.end()}; }

bool is_3d(Estimator e) {
    return e == Estimator::LSeg3D || e == Estimator::LSq3D || e == Estimator::RANSAC3D;
}

std::uint64_t fruit_seed(std::uint64_t global_seed, const std::string& fruit_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : fruit_id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return global_seed ^ h;
}

std::vector<SizeErrorRecord> run_size_sweep(const std::vector<SweepTarget>& targets, const SweepConfig& config) {
    if (config.estimators.empty() || config.retention.empty()) {
        throw Error(ErrorCode::InvalidInput, "sweep needs at least one estimator and one retention range");
    }
    config.hough.validate();
    RansacConfig probe(config.seed);
    probe.delta = config.ransac_delta;
    probe.max_iterations = config.ransac_iterations;
    probe.inlier_ratio_threshold = config.ransac_threshold;
    probe.validate();

    std::vector<std::vector<SizeErrorRecord>> per_target(targets.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < targets.size(); i = next++) {
            per_target[i] = sweep_one(targets[i], config);
        }
    };
    const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(targets.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    std::vector<SizeErrorRecord> out;
    out.reserve(targets.size() * config.estimators.size() * config.retention.size());
    for (auto& recs : per_target) {
        std::move(recs.begin(), recs.end(), std::back_inserter(out));
    }
    return out;
}

std::vector<SizeErrorRecord> run_size_sweep(const std::vector<Frame>& frames, const SweepConfig& config) {
    std::vector<SweepTarget> targets;
    for (const auto& frame : frames) {
        for (const auto& fruit : frame.fruits) {
            if (fruit.gt_diameter_mm) targets.push_back({&frame, &fruit, std::nullopt});
        }
    }
    return run_size_sweep(targets, config);
}

void write_records_csv(std::ostream& out, const std::vector<SizeErrorRecord>& records) {
    out << "fruit_id,estimator,retention_lo,retention_hi,d_est_mm,d_gt_mm,error_mm,status,skip_reason\n";
    for (const auto& r : records) {
        out << csv_field(r.fruit_id) << ',' << to_string(r.estimator) << ',' << percent(r.retention.lower) << ','
            << percent(r.retention.upper) << ',';
        if (r.ok()) {
            out << fixed(r.d_est) << ',' << fixed(r.d_gt) << ',' << fixed(r.error) << ",ok,\n";
        } else {
            out << ',' << fixed(r.d_gt) << ",,skipped," << csv_field(r.skip_reason) << '\n';
        }
    }
}

std::vector<SummaryEntry> summarize(const std::vector<SizeErrorRecord>& records) {
    struct Bucket {
        SummaryEntry entry;
        std::vector<double> errors;
    };
    std::vector<Bucket> buckets;
    for (const auto& r : records) {
        auto it = std::find_if(buckets.begin(), buckets.end(), [&](const Bucket& b) {
            return b.entry.estimator == r.estimator && b.entry.retention == r.retention;
        });
        if (it == buckets.end()) {
            buckets.push_back({{r.estimator, r.retention, std::nullopt, 0}, {}});
            it = std::prev(buckets.end());
        }
        if (r.ok()) {
            it->errors.push_back(r.error);
        } else {
            ++it->entry.n_skipped;
        }
    }
    std::vector<SummaryEntry> out;
    for (auto& b : buckets) {
        if (!b.errors.empty()) b.entry.summary = quartile_summary(b.errors);
        out.push_back(b.entry);
    }
    return out;
}

void write_summary_json(std::ostream& out, const std::vector<SummaryEntry>& entries) {
    nlohmann::json doc;
    doc["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json j = {{"estimator", to_string(e.estimator)},
                            {"retention", e.retention.label()},
                            {"retention_lo", e.retention.lower},
                            {"retention_hi", e.retention.upper},
                            {"n_skipped", e.n_skipped}};
        if (e.summary) {
            const auto& s = *e.summary;
            j["q1"] = s.q1;
            j["q2"] = s.q2;
            j["q3"] = s.q3;
            j["whisker_low"] = s.whisker_low;
            j["whisker_high"] = s.whisker_high;
            j["n_outliers"] = s.n_outliers;
            j["n_total"] = s.n_total;
        }
        doc["entries"].push_back(std::move(j));
    }
    out << doc.dump(2) << '\n';
}

std::vector<SummaryEntry> read_summary_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        std::vector<SummaryEntry> out;
        for (const auto& j : doc.at("entries")) {
            SummaryEntry e;
            e.estimator = parse_estimator(j.at("estimator").get<std::string>());
            e.retention = RetentionRange(j.at("retention_lo").get<double>(), j.at("retention_hi").get<double>());
            e.n_skipped = j.value("n_skipped", std::size_t{0});
            if (j.contains("q2")) {
                QuartileSummary s;
                s.q1 = j.at("q1").get<double>();
                s.q2 = j.at("q2").get<double>();
                s.q3 = j.at("q3").get<double>();
                s.whisker_low = j.at("whisker_low").get<double>();
                s.whisker_high = j.at("whisker_high").get<double>();
                s.n_outliers = j.at("n_outliers").get<std::size_t>();
                s.n_total = j.at("n_total").get<std::size_t>();
                e.summary = s;
            }
            out.push_back(e);
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("bad summary document: ") + e.what());
    }
}

}  // namespace fruitsize
