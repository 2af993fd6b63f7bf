#include "fruitsize/dataset.hpp"
#include "fruitsize/error.hpp"
#include "fruitsize/synthetic.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <queue>
#include <set>

using namespace fruitsize;
using nlohmann::json;
using testing_support::TempDir;

namespace {

std::vector<SyntheticScene> three_scenes() {
    std::vector<SyntheticScene> scenes;
    for (int i = 0; i < 3; ++i) {
        SceneSpec spec;
        spec.frame_id = "frame" + std::to_string(i);
        spec.n_fruits = 3;
        spec.seed = 100 + i;
        spec.width = 160;
        spec.height = 120;
        spec.focal_length_px = 150;
        scenes.push_back(generate_synthetic_scene(spec));
    }
    scenes[1].frame.capture_date = "2018-10-03";
    scenes[2].frame.fruits[0].gt_diameter_mm.reset();
    scenes[2].frame.fruits[1].mask.reset();
    return scenes;
}

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

void write_json(const std::filesystem::path& p, const json& j) { std::ofstream(p) << j.dump(1); }

ErrorCode load_error(const std::filesystem::path& p) {
    try {
        load_manifest(p);
    } catch (const Error& e) {
        return e.code();
    }
    throw std::runtime_error("manifest unexpectedly accepted");
}

Frame flat_frame(int w, int h, std::uint16_t raw) {
    Frame f;
    f.frame_id = "flat";
    f.width = w;
    f.height = h;
    f.intrinsics = CameraIntrinsics::centered(500, w, h, 1.0);
    f.depth = std::make_shared<DepthImage>(w, h, 1, raw);
    return f;
}

bool four_connected(const FruitMask& m) {
    std::set<MaskPixel> all(m.pixels().begin(), m.pixels().end()), seen;
    std::queue<MaskPixel> q;
    q.push(*all.begin());
    seen.insert(*all.begin());
    while (!q.empty()) {
        const auto p = q.front();
        q.pop();
        for (auto [du, dv] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const MaskPixel n{p.u + du, p.v + dv};
            if (all.count(n) && seen.insert(n).second) q.push(n);
        }
    }
    return seen.size() == all.size();
}

}  // namespace

TEST(Ripeness, Parse) {
    EXPECT_EQ(parse_ripeness("Ripe"), Ripeness::Ripe);
    EXPECT_EQ(parse_ripeness("Unripe"), Ripeness::Unripe);
    EXPECT_THROW(parse_ripeness("ripe"), Error);
    EXPECT_THROW(parse_ripeness("Intermediate"), Error);
}

TEST(Manifest, EmptyManifest) {
    TempDir dir;
    write_json(dir / "m.json", {{"schema_version", 1}, {"frames", json::array()}});
    EXPECT_TRUE(load_manifest(dir / "m.json").empty());
}

TEST(Manifest, RoundTripIsLossless) {
    TempDir dir;
    const auto scenes = three_scenes();
    const auto path = write_synthetic_dataset(dir.path(), scenes);
    const auto frames = load_manifest(path);
    ASSERT_EQ(frames.size(), scenes.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Frame& a = scenes[i].frame;
        const Frame& b = frames[i];
        EXPECT_EQ(a.frame_id, b.frame_id);
        EXPECT_EQ(a.rgb_path, b.rgb_path);
        EXPECT_EQ(a.depth_path, b.depth_path);
        EXPECT_EQ(a.width, b.width);
        EXPECT_EQ(a.height, b.height);
        EXPECT_EQ(a.intrinsics, b.intrinsics);
        EXPECT_EQ(a.capture_date, b.capture_date);
        EXPECT_EQ(a.fruits, b.fruits);
        EXPECT_EQ(*a.depth, *b.depth);
    }
    // Saving the loaded frames again reproduces the document.
    save_manifest(dir / "again.json", frames);
    EXPECT_EQ(read_json(dir / "again.json"), read_json(path));
}

TEST(Manifest, MaskAsImagePath) {
    TempDir dir;
    const auto scenes = three_scenes();
    const auto path = write_synthetic_dataset(dir.path(), scenes);
    const auto& fruit = scenes[0].frame.fruits[0];
    ByteImage img(scenes[0].frame.width, scenes[0].frame.height, 1, 0);
    for (const auto& p : fruit.mask->pixels()) img.at(p.u, p.v) = 255;
    write_byte_image(dir / "mask0.png", img);
    auto doc = read_json(path);
    doc["frames"][0]["fruits"][0]["mask"] = {{"path", "mask0.png"}};
    write_json(path, doc);
    EXPECT_EQ(load_manifest(path)[0].fruits[0].mask, fruit.mask);
}

TEST(Manifest, RejectsEveryMutation) {
    TempDir dir;
    const auto path = write_synthetic_dataset(dir.path(), three_scenes());
    const json good = read_json(path);
    ASSERT_NO_THROW(load_manifest(path));

    struct Mutation {
        std::string name;
        std::function<void(json&)> apply;
        ErrorCode expected;
    };
    const std::vector<Mutation> mutations = {
        {"schema version", [](json& d) { d["schema_version"] = 2; }, ErrorCode::SchemaError},
        {"no schema version", [](json& d) { d.erase("schema_version"); }, ErrorCode::SchemaError},
        {"frames not array", [](json& d) { d["frames"] = 3; }, ErrorCode::SchemaError},
        {"missing depth", [](json& d) { d["frames"][0]["depth"] = "nope.png"; }, ErrorCode::FileError},
        {"missing rgb", [](json& d) { d["frames"][1]["rgb"] = "nope.png"; }, ErrorCode::FileError},
        {"resolution mismatch", [](json& d) { d["frames"][0]["rgb"] = "small.png"; }, ErrorCode::SchemaError},
        {"duplicate frame id", [](json& d) { d["frames"][1]["frame_id"] = d["frames"][0]["frame_id"]; },
         ErrorCode::SchemaError},
        {"duplicate fruit id",
         [](json& d) { d["frames"][1]["fruits"][0]["fruit_id"] = d["frames"][0]["fruits"][0]["fruit_id"]; },
         ErrorCode::SchemaError},
        {"zero focal", [](json& d) { d["frames"][0]["intrinsics"]["focal_length_px"] = 0; }, ErrorCode::SchemaError},
        {"negative depth scale", [](json& d) { d["frames"][0]["intrinsics"]["depth_scale"] = -1; },
         ErrorCode::SchemaError},
        {"principal point shape", [](json& d) { d["frames"][0]["intrinsics"]["principal_point"] = {1}; },
         ErrorCode::SchemaError},
        {"bad date", [](json& d) { d["frames"][0]["capture_date"] = "03/10/2018"; }, ErrorCode::SchemaError},
        {"impossible date", [](json& d) { d["frames"][0]["capture_date"] = "2018-13-40"; }, ErrorCode::SchemaError},
        {"february 30", [](json& d) { d["frames"][0]["capture_date"] = "2019-02-30"; }, ErrorCode::SchemaError},
        {"inverted box", [](json& d) { d["frames"][0]["fruits"][0]["box"] = {50, 50, 40, 60}; }, ErrorCode::SchemaError},
        {"box outside image", [](json& d) { d["frames"][0]["fruits"][0]["box"] = {-5, 0, 10, 10}; },
         ErrorCode::SchemaError},
        {"box arity", [](json& d) { d["frames"][0]["fruits"][0]["box"] = {1, 2, 3}; }, ErrorCode::SchemaError},
        {"ripeness label", [](json& d) { d["frames"][0]["fruits"][0]["ripeness"] = "Overripe"; },
         ErrorCode::SchemaError},
        {"diameter too small", [](json& d) { d["frames"][0]["fruits"][0]["gt_diameter_mm"] = 2.0; },
         ErrorCode::SchemaError},
        {"diameter too large", [](json& d) { d["frames"][0]["fruits"][0]["gt_diameter_mm"] = 400.0; },
         ErrorCode::SchemaError},
        {"diameter not number", [](json& d) { d["frames"][0]["fruits"][0]["gt_diameter_mm"] = "70"; },
         ErrorCode::SchemaError},
        {"malformed rle", [](json& d) { d["frames"][0]["fruits"][0]["mask"] = {{"rle", "1 2 q"}}; },
         ErrorCode::SchemaError},
        {"rle wrong total", [](json& d) { d["frames"][0]["fruits"][0]["mask"] = {{"rle", "5 5"}}; },
         ErrorCode::SchemaError},
        {"mask outside box",
         [](json& d) {
             auto& fr = d["frames"][0]["fruits"][0];
             auto& other = d["frames"][0]["fruits"][1];
             fr["mask"] = other["mask"];
         },
         ErrorCode::SchemaError},
        {"mask missing file", [](json& d) { d["frames"][0]["fruits"][0]["mask"] = {{"path", "nomask.png"}}; },
         ErrorCode::FileError},
        {"mask unknown encoding", [](json& d) { d["frames"][0]["fruits"][0]["mask"] = {{"polygon", json::array()}}; },
         ErrorCode::SchemaError},
        {"missing fruit id", [](json& d) { d["frames"][0]["fruits"][0].erase("fruit_id"); }, ErrorCode::SchemaError},
    };
    ByteImage small(10, 10, 3);
    write_byte_image(dir / "small.png", small);
    for (const auto& m : mutations) {
        json doc = good;
        m.apply(doc);
        write_json(path, doc);
        try {
            EXPECT_EQ(load_error(path), m.expected) << m.name;
        } catch (const std::runtime_error&) {
            ADD_FAILURE() << "accepted mutation: " << m.name;
        }
    }
    std::ofstream(path) << "{ not json";
    EXPECT_EQ(load_error(path), ErrorCode::SchemaError);
}

TEST(Manifest, MissingRasterNamesFrameAndPath) {
    TempDir dir;
    const auto path = write_synthetic_dataset(dir.path(), three_scenes());
    auto doc = read_json(path);
    doc["frames"][2]["depth"] = "gone_depth.png";
    write_json(path, doc);
    try {
        load_manifest(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FileError);
        EXPECT_NE(std::string(e.what()).find("frame2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("gone_depth.png"), std::string::npos);
    }
}

TEST(Manifest, DiameterWarnings) {
    TempDir dir;
    const auto path = write_synthetic_dataset(dir.path(), three_scenes());
    auto doc = read_json(path);
    doc["frames"][0]["fruits"][0]["gt_diameter_mm"] = 150.0;
    doc["frames"][0]["fruits"][1]["gt_diameter_mm"] = 10.0;
    write_json(path, doc);
    std::vector<std::string> warnings;
    EXPECT_NO_THROW(load_manifest(path, &warnings));
    EXPECT_EQ(warnings.size(), 2u);
}

TEST(Detections, EmptyFile) {
    TempDir dir;
    std::ofstream(dir / "d.json") << "";
    EXPECT_TRUE(load_detections(dir / "d.json").empty());
    std::ofstream(dir / "e.json") << "[]";
    EXPECT_TRUE(load_detections(dir / "e.json").empty());
}

TEST(Detections, Validation) {
    TempDir dir;
    const auto manifest = write_synthetic_dataset(dir.path(), three_scenes());
    const auto frames = load_manifest(manifest);
    const auto write = [&](const json& j) { write_json(dir / "d.json", j); };
    const auto code = [&](const std::vector<Frame>* f) {
        try {
            load_detections(dir / "d.json", f);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::PlacementError;  // sentinel: accepted
    };
    write(json::array({{{"frame_id", "frame0"}, {"box", {1, 1, 5, 5}}, {"class", "Ripe"}, {"score", 1.2}}}));
    EXPECT_EQ(code(nullptr), ErrorCode::SchemaError);
    write(json::array({{{"frame_id", "frame0"}, {"box", {1, 1, 5, 5}}, {"class", "Ripe"}, {"score", -0.1}}}));
    EXPECT_EQ(code(nullptr), ErrorCode::SchemaError);
    write(json::array({{{"frame_id", "nowhere"}, {"box", {1, 1, 5, 5}}, {"class", "Ripe"}, {"score", 0.5}}}));
    EXPECT_EQ(code(&frames), ErrorCode::ReferentialError);
    EXPECT_EQ(code(nullptr), ErrorCode::PlacementError);
    write(json::array({{{"frame_id", "frame0"}, {"box", {1, 1, 5, 5}}, {"class", "Green"}, {"score", 0.5}}}));
    EXPECT_EQ(code(nullptr), ErrorCode::SchemaError);
    write(json::object());
    EXPECT_EQ(code(nullptr), ErrorCode::SchemaError);
}

TEST(Detections, RoundTripBitExact) {
    TempDir dir;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> c(0, 600), s(0, 1);
    std::vector<DetectionRecord> dets;
    for (int i = 0; i < 100; ++i) {
        const double u = c(rng), v = c(rng);
        dets.push_back({"frame" + std::to_string(i % 7), {u, v, u + 1 + c(rng), v + 1 + c(rng)},
                        i % 3 ? Ripeness::Ripe : Ripeness::Unripe, s(rng)});
    }
    save_detections(dir / "d.json", dets);
    EXPECT_EQ(load_detections(dir / "d.json"), dets);
    const auto grouped = group_by_frame(dets);
    EXPECT_EQ(grouped.size(), 7u);
    std::size_t total = 0;
    for (const auto& [id, v] : grouped) {
        total += v.size();
        for (const auto& d : v) EXPECT_EQ(d.frame_id, id);
    }
    EXPECT_EQ(total, dets.size());
}

TEST(FallbackSegment, RecoversSyntheticSphere) {
    SceneSpec spec;
    spec.n_fruits = 1;
    spec.seed = 5;
    spec.diameter_min_mm = spec.diameter_max_mm = 90.0;
    spec.depth_min_mm = spec.depth_max_mm = 1000.0;
    const auto scene = generate_synthetic_scene(spec);
    const auto& fruit = scene.frame.fruits.at(0);
    const auto& e = fruit.mask->extent();
    // Box with a two-pixel margin of background; the sphere still fills most of it.
    const BoundingBox box{e.u_min - 2.5, e.v_min - 2.5, e.u_max + 2.5, e.v_max + 2.5};
    EXPECT_EQ(fallback_segment(scene.frame, box), *fruit.mask);
}

TEST(FallbackSegment, FlatWallGivesWholeBox) {
    const Frame f = flat_frame(40, 30, 900);
    const auto m = fallback_segment(f, {4.5, 2.5, 14.5, 9.5});
    EXPECT_EQ(m.size(), 10u * 7u);
    EXPECT_EQ(m.enclosing_box(), (BoundingBox{4.5, 2.5, 14.5, 9.5}));
}

TEST(FallbackSegment, Errors) {
    const Frame invalid = flat_frame(40, 30, 0);
    try {
        fallback_segment(invalid, {4.5, 2.5, 14.5, 9.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyMask);
    }
    const Frame f = flat_frame(40, 30, 900);
    EXPECT_THROW(fallback_segment(f, {-3, 0, 10, 10}), Error);
    EXPECT_THROW(fallback_segment(f, {0, 0, 50, 10}), Error);
}

TEST(FallbackSegment, SubsetOfBoxAndConnectedOnRandomDepth) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> d(0, 4);
    for (int t = 0; t < 100; ++t) {
        Frame f = flat_frame(30, 30, 0);
        DepthImage img(30, 30);
        for (auto& px : img.data) {
            const int k = d(rng);
            px = k == 0 ? 0 : static_cast<std::uint16_t>(k == 1 ? 1000 : 1040 + 20 * k);
        }
        f.depth = std::make_shared<DepthImage>(img);
        const BoundingBox box{2.5, 3.5, 25.5, 20.5};
        FruitMask m({{0, 0}});
        try {
            m = fallback_segment(f, box);
        } catch (const Error&) {
            continue;
        }
        for (const auto& p : m.pixels()) EXPECT_TRUE(box.contains(p.u, p.v));
        EXPECT_TRUE(four_connected(m)) << "trial " << t;
    }
}
