// Command-line front end for the fruit sizing library.

#include "fruitsize/boxplot_svg.hpp"
#include "fruitsize/dataset.hpp"
#include "fruitsize/detection_eval.hpp"
#include "fruitsize/error.hpp"
#include "fruitsize/importers.hpp"
#include "fruitsize/size_sweep.hpp"
#include "fruitsize/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace fruitsize;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitEstimation = 2;

// "LO:HI" with plain numbers.
std::pair<double, double> parse_pair(const std::string& text, const std::string& flag) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) throw std::invalid_argument(text);
        std::size_t used_lo = 0, used_hi = 0;
        const std::string lo_text = text.substr(0, colon), hi_text = text.substr(colon + 1);
        const double lo = std::stod(lo_text, &used_lo);
        const double hi = std::stod(hi_text, &used_hi);
        if (used_lo != lo_text.size() || used_hi != hi_text.size()) throw std::invalid_argument(text);
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidInput, flag + " expects LO:HI, got '" + text + "'");
    }
}

struct SweepFlags {
    std::vector<std::string> estimators;
    std::vector<std::string> retention;
    double ransac_delta = 3.0;
    int ransac_iters = 500;
    double ransac_threshold = 0.9;
    bool ransac_no_refit = false;
    std::string hough_radius_frac;
    std::uint64_t seed = 0;
    int jobs = 1;

    void attach(CLI::App* app) {
        app->add_option("--estimators", estimators, "Comma-separated estimator names")->delimiter(',');
        app->add_option("--retention", retention, "Comma-separated retention ranges in percent, e.g. 10:90")
            ->delimiter(',');
        app->add_option("--ransac-delta", ransac_delta, "RANSAC inlier distance in mm")->capture_default_str();
        app->add_option("--ransac-iters", ransac_iters, "RANSAC iteration budget")->capture_default_str();
        app->add_option("--ransac-threshold", ransac_threshold, "RANSAC early-exit inlier ratio")
            ->capture_default_str();
        app->add_flag("--ransac-no-refit", ransac_no_refit, "Skip the least-squares refit on RANSAC inliers");
        app->add_option("--hough-radius-frac", hough_radius_frac, "Hough radius range as LO:HI fractions of the mask size");
        app->add_option("--seed", seed, "Global random seed")->capture_default_str();
        app->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    }

    SweepConfig config() const {
        SweepConfig c;
        if (!estimators.empty()) {
            c.estimators.clear();
            for (const auto& e : estimators) c.estimators.push_back(parse_estimator(e));
        }
        if (!retention.empty()) {
            c.retention.clear();
            for (const auto& r : retention) c.retention.push_back(RetentionRange::parse(r));
        }
        if (!hough_radius_frac.empty()) {
            std::tie(c.hough.radius_frac_lo, c.hough.radius_frac_hi) = parse_pair(hough_radius_frac, "--hough-radius-frac");
        }
        c.ransac_delta = ransac_delta;
        c.ransac_iterations = ransac_iters;
        c.ransac_threshold = ransac_threshold;
        c.ransac_refit = !ransac_no_refit;
        c.seed = seed;
        c.jobs = jobs;
        return c;
    }
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::FileError, "cannot write '" + path.string() + "'");
    out << content;
}

std::vector<Frame> load_frames(const std::string& manifest) {
    std::vector<std::string> warnings;
    auto frames = load_manifest(manifest, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return frames;
}

// Writes the sweep artifacts. Returns exit code 2 when every fruit was skipped entirely.
int emit_sweep(const std::vector<SizeErrorRecord>& records, const fs::path& out_dir, bool svg) {
    fs::create_directories(out_dir);
    {
        std::ostringstream csv;
        write_records_csv(csv, records);
        write_file(out_dir / "records.csv", csv.str());
    }
    const auto entries = summarize(records);
    {
        std::ostringstream json;
        write_summary_json(json, entries);
        write_file(out_dir / "summary.json", json.str());
    }
    if (svg) write_file(out_dir / "boxplot.svg", render_boxplot_svg(entries));

    std::map<std::string, bool> fruit_ok;
    std::size_t skipped = 0;
    for (const auto& r : records) {
        fruit_ok[r.fruit_id] = fruit_ok[r.fruit_id] || r.ok();
        if (!r.ok()) ++skipped;
    }
    std::cerr << records.size() << " records, " << skipped << " skipped, " << fruit_ok.size() << " fruits\n";
    const bool any_ok = std::any_of(fruit_ok.begin(), fruit_ok.end(), [](const auto& kv) { return kv.second; });
    if (!fruit_ok.empty() && !any_ok) {
        std::cerr << "error: estimation failed for every fruit\n";
        return kExitEstimation;
    }
    return kExitOk;
}

int cmd_size_sweep(const std::string& manifest, const fs::path& out, const SweepFlags& flags, bool svg) {
    const auto frames = load_frames(manifest);
    const auto config = flags.config();
    std::size_t n_targets = 0;
    for (const auto& f : frames) {
        for (const auto& fruit : f.fruits) n_targets += fruit.gt_diameter_mm.has_value();
    }
    if (n_targets == 0) throw Error(ErrorCode::InvalidInput, "manifest has no fruit with a ground-truth diameter");
    return emit_sweep(run_size_sweep(frames, config), out, svg);
}

int cmd_detect_eval(const std::string& manifest, const std::string& detections_path, const fs::path& out,
                    double iou_threshold, const std::string& strategy_name, const SweepFlags& flags, bool svg) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidInput, "--iou-threshold must lie in (0, 1)");
    }
    const MatchStrategy strategy = strategy_name == "hungarian" ? MatchStrategy::Hungarian : MatchStrategy::Greedy;
    const auto frames = load_frames(manifest);
    const auto detections = load_detections(detections_path, &frames);
    const auto config = flags.config();
    const auto by_frame = group_by_frame(detections);

    std::vector<ImageDetections> images;
    std::vector<SweepTarget> targets;
    std::size_t n_pairs = 0, n_unmatched_det = 0, n_unmatched_gt = 0, n_gt = 0;
    for (const auto& frame : frames) {
        ImageDetections img;
        if (auto it = by_frame.find(frame.frame_id); it != by_frame.end()) img.detections = it->second;
        for (const auto& fruit : frame.fruits) img.ground_truths.push_back({fruit.box, fruit.ripeness});
        n_gt += frame.fruits.size();

        const auto match = match_detections(img.detections, frame.fruits, iou_threshold, strategy);
        n_pairs += match.pairs.size();
        n_unmatched_det += match.unmatched_detections.size();
        n_unmatched_gt += match.unmatched_ground_truths.size();
        for (const auto& p : match.pairs) {
            const auto& fruit = frame.fruits[p.ground_truth];
            if (fruit.gt_diameter_mm) targets.push_back({&frame, &fruit, img.detections[p.detection].box});
        }
        images.push_back(std::move(img));
    }
    if (n_gt == 0) throw Error(ErrorCode::InvalidInput, "manifest has no ground-truth fruit");

    const auto metrics = detection_metrics(images);
    fs::create_directories(out);
    const nlohmann::json doc = {
        {"map50", metrics.map50},
        {"map75", metrics.map75},
        {"map50_95", metrics.map50_95},
        {"mar", metrics.mar},
        {"n_frames", frames.size()},
        {"n_detections", detections.size()},
        {"n_ground_truths", n_gt},
        {"matching",
         {{"iou_threshold", iou_threshold},
          {"strategy", strategy == MatchStrategy::Hungarian ? "hungarian" : "greedy"},
          {"n_pairs", n_pairs},
          {"n_unmatched_detections", n_unmatched_det},
          {"n_unmatched_ground_truths", n_unmatched_gt}}},
    };
    write_file(out / "metrics.json", doc.dump(2) + "\n");
    std::printf("mAP50 %.2f  mAP75 %.2f  mAP50:95 %.2f  mAR %.2f\n", metrics.map50, metrics.map75,
                metrics.map50_95, metrics.mar);
    if (targets.empty()) {
        std::cerr << "no matched fruit carries a ground-truth diameter; size records not written\n";
        return kExitOk;
    }
    return emit_sweep(run_size_sweep(targets, config), out, svg);
}

struct SynthFlags {
    int frames = 10;
    int fruits = 6;
    std::string diameter = "40:95";
    std::string depth = "1000:1500";
    double noise = 0.0;
    double occlusion = 0.0;
    double outliers = 0.0;
    std::uint64_t seed = 0;
    int width = 640;
    int height = 480;
    double focal = 600.0;
};

int cmd_synth(const SynthFlags& f, const fs::path& out) {
    if (f.frames < 1) throw Error(ErrorCode::InvalidInput, "--frames must be at least 1");
    std::vector<SyntheticScene> scenes;
    for (int i = 0; i < f.frames; ++i) {
        SceneSpec spec;
        char id[32];
        std::snprintf(id, sizeof(id), "synth_%04d", i);
        spec.frame_id = id;
        spec.n_fruits = f.fruits;
        std::tie(spec.diameter_min_mm, spec.diameter_max_mm) = parse_pair(f.diameter, "--diameter");
        std::tie(spec.depth_min_mm, spec.depth_max_mm) = parse_pair(f.depth, "--depth");
        spec.noise_sigma_mm = f.noise;
        spec.occlusion_fraction = f.occlusion;
        spec.outlier_fraction = f.outliers;
        spec.seed = fruit_seed(f.seed, spec.frame_id);
        spec.width = f.width;
        spec.height = f.height;
        spec.focal_length_px = f.focal;
        scenes.push_back(generate_synthetic_scene(spec));
    }
    const auto manifest = write_synthetic_dataset(out, scenes);
    std::cerr << "wrote " << manifest.string() << '\n';
    return kExitOk;
}

struct ImportFlags {
    std::string annotations, rgb_dir, depth_dir, depth_suffix = ".png", diameters;
    double focal = 0.0, depth_scale = 0.0;
    std::string principal_point;

    void attach(CLI::App* app) {
        app->add_option("--annotations", annotations, "COCO-style annotation JSON")->required()->check(CLI::ExistingFile);
        app->add_option("--rgb-dir", rgb_dir, "Directory of RGB images")->required();
        app->add_option("--depth-dir", depth_dir, "Directory of 16-bit depth PNGs")->required();
        app->add_option("--depth-suffix", depth_suffix, "Depth file name suffix after the RGB stem")->capture_default_str();
        app->add_option("--diameters", diameters, "CSV of annotation_id,diameter_mm");
        app->add_option("--focal", focal, "Focal length in pixels")->required();
        app->add_option("--principal-point", principal_point, "Principal point as U0:V0")->required();
        app->add_option("--depth-scale", depth_scale, "Millimetres per depth unit")->required();
    }

    void apply(CocoImportOptions& o) const {
        o.annotations = annotations;
        o.rgb_dir = rgb_dir;
        o.depth_dir = depth_dir;
        o.depth_suffix = depth_suffix;
        if (!diameters.empty()) o.diameters_csv = diameters;
        o.intrinsics.focal_length_px = focal;
        std::tie(o.intrinsics.u0, o.intrinsics.v0) = parse_pair(principal_point, "--principal-point");
        o.intrinsics.depth_scale = depth_scale;
    }
};

int cmd_import(CocoImportOptions options, const ImportFlags& flags, const fs::path& out) {
    flags.apply(options);
    std::vector<std::string> warnings;
    const auto frames = import_coco_dataset(options, out, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    std::size_t fruits = 0;
    for (const auto& f : frames) fruits += f.fruits.size();
    std::cerr << "imported " << frames.size() << " frames, " << fruits << " fruits\n";
    return kExitOk;
}

int cmd_boxplot(const std::string& summary, const fs::path& out) {
    std::ifstream in(summary);
    if (!in) throw Error(ErrorCode::FileError, "cannot open '" + summary + "'");
    const auto entries = read_summary_json(in);
    fs::create_directories(out);
    write_file(out / "boxplot.svg", render_boxplot_svg(entries));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fruit diameter estimation from RGB-D imagery"};
    app.require_subcommand(1);

    std::string manifest, detections, summary, strategy = "greedy";
    std::string out = "out";
    double iou_threshold = 0.7;
    bool svg = false;

    auto* sweep = app.add_subcommand("size-sweep", "Run every estimator over every retention range");
    SweepFlags sweep_flags;
    sweep->add_option("--manifest", manifest, "Manifest JSON")->required();
    sweep->add_option("--out", out, "Output directory")->capture_default_str();
    sweep->add_flag("--svg", svg, "Also write boxplot.svg");
    sweep_flags.attach(sweep);

    auto* detect = app.add_subcommand("detect-eval", "Score detections and size the matched fruits");
    SweepFlags detect_flags;
    detect->add_option("--manifest", manifest, "Manifest JSON")->required();
    detect->add_option("--detections", detections, "Detection JSON array")->required();
    detect->add_option("--out", out, "Output directory")->capture_default_str();
    detect->add_option("--iou-threshold", iou_threshold, "Matching IoU threshold")->capture_default_str();
    detect->add_option("--match", strategy, "Matching strategy")
        ->check(CLI::IsMember({"greedy", "hungarian"}))
        ->capture_default_str();
    detect->add_flag("--svg", svg, "Also write boxplot.svg");
    detect_flags.attach(detect);

    auto* synth = app.add_subcommand("synth", "Render a synthetic sphere dataset");
    SynthFlags synth_flags;
    synth->add_option("--out", out, "Output directory")->capture_default_str();
    synth->add_option("--frames", synth_flags.frames)->capture_default_str();
    synth->add_option("--fruits", synth_flags.fruits, "Fruits per frame")->capture_default_str();
    synth->add_option("--diameter", synth_flags.diameter, "Diameter range LO:HI in mm")->capture_default_str();
    synth->add_option("--depth", synth_flags.depth, "Center depth range LO:HI in mm")->capture_default_str();
    synth->add_option("--noise", synth_flags.noise, "Depth noise sigma in mm")->capture_default_str();
    synth->add_option("--occlusion", synth_flags.occlusion, "Occluded diameter fraction")->capture_default_str();
    synth->add_option("--outliers", synth_flags.outliers, "Fraction of clutter depths")->capture_default_str();
    synth->add_option("--seed", synth_flags.seed)->capture_default_str();
    synth->add_option("--width", synth_flags.width)->capture_default_str();
    synth->add_option("--height", synth_flags.height)->capture_default_str();
    synth->add_option("--focal", synth_flags.focal, "Focal length in pixels")->capture_default_str();

    auto* import_oa = app.add_subcommand("import-openaccess", "Best-effort converter for box-annotated COCO exports");
    ImportFlags oa_flags;
    import_oa->add_option("--out", out, "Output directory")->capture_default_str();
    oa_flags.attach(import_oa);

    auto* import_am = app.add_subcommand("import-amodal", "Best-effort converter for modal-mask COCO exports");
    ImportFlags am_flags;
    import_am->add_option("--out", out, "Output directory")->capture_default_str();
    am_flags.attach(import_am);

    auto* boxplot = app.add_subcommand("boxplot-svg", "Render boxplot.svg from a summary document");
    boxplot->add_option("--summary", summary, "summary.json from size-sweep")->required();
    boxplot->add_option("--out", out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*sweep) return cmd_size_sweep(manifest, out, sweep_flags, svg);
        if (*detect) return cmd_detect_eval(manifest, detections, out, iou_threshold, strategy, detect_flags, svg);
        if (*synth) return cmd_synth(synth_flags, out);
        if (*import_oa) return cmd_import(openaccess_preset(), oa_flags, out);
        if (*import_am) return cmd_import(amodal_preset(), am_flags, out);
        if (*boxplot) return cmd_boxplot(summary, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
