#include "cli_support.hpp"
#include "fruitsize/dataset.hpp"
#include "fruitsize/size_sweep.hpp"
#include "fruitsize/synthetic.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace fruitsize;
using testing_support::run_cli;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// Small synthetic dataset written by the tool itself.
struct Dataset {
    TempDir dir;
    std::filesystem::path manifest;

    Dataset() {
        const int rc = run_cli("synth --out " + q(dir / "data") + " --frames 2 --fruits 3 --noise 2 --seed 9",
                               dir / "synth.log");
        EXPECT_EQ(rc, 0) << slurp(dir / "synth.log");
        manifest = dir / "data/manifest.json";
    }
};

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    TempDir dir;
    EXPECT_EQ(run_cli("--help", dir / "log"), 0);
    EXPECT_NE(slurp(dir / "log").find("size-sweep"), std::string::npos);
    EXPECT_EQ(run_cli("", dir / "log"), 1);
    EXPECT_EQ(run_cli("no-such-command", dir / "log"), 1);
    EXPECT_EQ(run_cli("size-sweep", dir / "log"), 1);
    EXPECT_EQ(run_cli("size-sweep --manifest " + q(dir / "missing.json"), dir / "log"), 1);
}

TEST(Cli, SynthThenSizeSweep) {
    Dataset ds;
    ASSERT_TRUE(std::filesystem::exists(ds.manifest));
    const auto frames = load_manifest(ds.manifest);
    ASSERT_EQ(frames.size(), 2u);
    EXPECT_EQ(frames[0].frame_id, "synth_0000");
    EXPECT_EQ(frames[0].fruits.size(), 3u);

    const auto out = ds.dir / "sweep";
    ASSERT_EQ(run_cli("size-sweep --manifest " + q(ds.manifest) + " --out " + q(out) +
                          " --estimators LSeg2D,LSq3D --retention 0:100,10:90,40:60 --seed 1 --svg",
                      ds.dir / "log"),
              0)
        << slurp(ds.dir / "log");
    const std::string csv = slurp(out / "records.csv");
    EXPECT_EQ(count_lines(csv), 1 + 6 * 2 * 3);
    EXPECT_EQ(csv.rfind("fruit_id,estimator,retention_lo,retention_hi,", 0), 0u);
    EXPECT_NE(csv.find(",LSq3D,40,60,"), std::string::npos);
    EXPECT_EQ(csv.find("HT2D"), std::string::npos);

    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_FALSE(summary.empty());
    EXPECT_NE(slurp(out / "boxplot.svg").find("<svg"), std::string::npos);

    // boxplot-svg renders the same picture from the summary alone.
    ASSERT_EQ(run_cli("boxplot-svg --summary " + q(out / "summary.json") + " --out " + q(ds.dir / "plot"),
                      ds.dir / "log"),
              0);
    EXPECT_EQ(slurp(ds.dir / "plot/boxplot.svg"), slurp(out / "boxplot.svg"));
}

TEST(Cli, SweepFlagValidation) {
    Dataset ds;
    const std::string base = "size-sweep --manifest " + q(ds.manifest) + " --out " + q(ds.dir / "o") + " ";
    EXPECT_EQ(run_cli(base + "--estimators Bogus", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--retention 90:10", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--retention 10-90", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--jobs 0", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--hough-radius-frac 0.8:0.2", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--estimators RANSAC3D --ransac-delta 2 --ransac-iters 50 --ransac-threshold 0.8 "
                             "--ransac-no-refit --hough-radius-frac 0.3:0.7 --jobs 2",
                      ds.dir / "log"),
              0)
        << slurp(ds.dir / "log");
}

TEST(Cli, SchemaFailureExitsOne) {
    TempDir dir;
    std::ofstream(dir / "bad.json") << R"({"schema_version": 1, "frames": [{"frame_id": 3}]})";
    EXPECT_EQ(run_cli("size-sweep --manifest " + q(dir / "bad.json") + " --out " + q(dir / "o"), dir / "log"), 1);
    EXPECT_NE(slurp(dir / "log").find("error"), std::string::npos);
}

TEST(Cli, AllFruitsFailingExitsTwo) {
    TempDir dir;
    SceneSpec spec;
    spec.n_fruits = 2;
    auto scene = generate_synthetic_scene(spec);
    std::fill(scene.depth.data.begin(), scene.depth.data.end(), std::uint16_t{0});
    const auto manifest = write_synthetic_dataset(dir.path(), {scene});
    EXPECT_EQ(run_cli("size-sweep --manifest " + q(manifest) + " --out " + q(dir / "o"), dir / "log"), 2)
        << slurp(dir / "log");
    EXPECT_TRUE(std::filesystem::exists(dir / "o/records.csv"));
}

TEST(Cli, DetectEval) {
    Dataset ds;
    const auto frames = load_manifest(ds.manifest);
    std::vector<DetectionRecord> dets;
    for (const auto& f : frames) {
        for (const auto& a : f.fruits) dets.push_back({f.frame_id, a.box, a.ripeness, 0.9});
    }
    dets.push_back({frames[0].frame_id, {0, 0, 5, 5}, Ripeness::Ripe, 0.3});
    save_detections(ds.dir / "dets.json", dets);

    const auto out = ds.dir / "eval";
    ASSERT_EQ(run_cli("detect-eval --manifest " + q(ds.manifest) + " --detections " + q(ds.dir / "dets.json") +
                          " --out " + q(out) + " --estimators BBox2D --retention 0:100",
                      ds.dir / "log"),
              0)
        << slurp(ds.dir / "log");
    const auto m = nlohmann::json::parse(slurp(out / "metrics.json"));
    EXPECT_EQ(m["n_detections"], 7);
    EXPECT_EQ(m["n_ground_truths"], 6);
    EXPECT_EQ(m["matching"]["n_pairs"], 6);
    EXPECT_EQ(m["matching"]["n_unmatched_detections"], 1);
    EXPECT_EQ(m["matching"]["iou_threshold"], 0.7);
    EXPECT_EQ(m["matching"]["strategy"], "greedy");
    EXPECT_DOUBLE_EQ(m["mar"].get<double>(), 100.0);
    EXPECT_NE(slurp(ds.dir / "log").find("mAP50"), std::string::npos);
    EXPECT_EQ(count_lines(slurp(out / "records.csv")), 1 + 6);

    const std::string base = "detect-eval --manifest " + q(ds.manifest) + " --detections " + q(ds.dir / "dets.json") +
                             " --out " + q(out) + " ";
    EXPECT_EQ(run_cli(base + "--iou-threshold 1.5", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--match optimal", ds.dir / "log"), 1);
    EXPECT_EQ(run_cli(base + "--match hungarian --iou-threshold 0.5", ds.dir / "log"), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(out / "metrics.json"))["matching"]["strategy"], "hungarian");

    std::ofstream(ds.dir / "bad_dets.json") << R"([{"frame_id": "nope", "box": [0,0,1,1], "class": "Ripe", "score": 0.5}])";
    EXPECT_EQ(run_cli("detect-eval --manifest " + q(ds.manifest) + " --detections " + q(ds.dir / "bad_dets.json") +
                          " --out " + q(out),
                      ds.dir / "log"),
              1);
    EXPECT_NE(slurp(ds.dir / "log").find("unknown frame_id"), std::string::npos);
}

TEST(Cli, SynthValidation) {
    TempDir dir;
    EXPECT_EQ(run_cli("synth --out " + q(dir / "a") + " --frames 0", dir / "log"), 1);
    EXPECT_EQ(run_cli("synth --out " + q(dir / "a") + " --occlusion 1.2", dir / "log"), 1);
    EXPECT_EQ(run_cli("synth --out " + q(dir / "a") + " --diameter 40", dir / "log"), 1);
}

TEST(Cli, ImportCommandsNeedCamera) {
    TempDir dir;
    std::ofstream(dir / "coco.json") << R"({"images": [], "annotations": [], "categories": []})";
    EXPECT_EQ(run_cli("import-openaccess --annotations " + q(dir / "coco.json") + " --rgb-dir " + q(dir.path()) +
                          " --depth-dir " + q(dir.path()),
                      dir / "log"),
              1);
    EXPECT_EQ(run_cli("import-amodal --annotations " + q(dir / "coco.json") + " --rgb-dir " + q(dir.path()) +
                          " --depth-dir " + q(dir.path()) + " --focal 600 --principal-point 320:240 --depth-scale 1" +
                          " --out " + q(dir / "m"),
                      dir / "log"),
              0)
        << slurp(dir / "log");
    EXPECT_TRUE(std::filesystem::exists(dir / "m/manifest.json"));
}
