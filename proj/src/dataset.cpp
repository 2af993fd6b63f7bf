#include "fruitsize/dataset.hpp"

#include "fruitsize/error.hpp"
#include "fruitsize/rle.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace fruitsize {

using nlohmann::json;

namespace {

constexpr double kDiameterWarnLo = 20.0;
constexpr double kDiameterWarnHi = 120.0;
constexpr double kDiameterHardLo = 5.0;
constexpr double kDiameterHardHi = 300.0;
constexpr double kFallbackBand = 0.10;

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaError, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) schema_fail(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema_fail(where, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) schema_fail(where, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) schema_fail(where, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

BoundingBox parse_box(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 4 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
        schema_fail(where, "box must be [u_min, v_min, u_max, v_max]");
    }
    BoundingBox box{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
    try {
        box.validate();
    } catch (const Error& e) {
        schema_fail(where, e.what());
    }
    return box;
}

json box_to_json(const BoundingBox& b) { return json::array({b.u_min, b.v_min, b.u_max, b.v_max}); }

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileError, "cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::FileError, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

FruitMask parse_mask(const json& v, const std::filesystem::path& base, const Frame& frame,
                     const std::string& where) {
    if (!v.is_object()) schema_fail(where, "mask must be an object with 'rle' or 'path'");
    if (v.contains("rle")) {
        const json& rle = v["rle"];
        if (!rle.is_string()) schema_fail(where, "mask 'rle' must be a string");
        try {
            return decode_rle(rle.get<std::string>(), frame.width, frame.height);
        } catch (const Error& e) {
            schema_fail(where, e.what());
        }
    }
    if (v.contains("path")) {
        const std::string rel = require_string(v, "path", where);
        const ByteImage img = read_byte_image(base / rel);
        if (img.width != frame.width || img.height != frame.height || img.channels != 1) {
            schema_fail(where, "mask image '" + rel + "' must be single channel at the frame resolution");
        }
        std::vector<MaskPixel> pixels;
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                if (img.at(x, y) != 0) pixels.push_back({x, y});
            }
        }
        if (pixels.empty()) schema_fail(where, "mask image '" + rel + "' is empty");
        return FruitMask(std::move(pixels));
    }
    schema_fail(where, "mask must carry 'rle' or 'path'");
}

bool is_iso_date(const std::string& s) {
    static const std::regex pattern(R"(^(\d{4})-(\d{2})-(\d{2})$)");
    std::smatch m;
    if (!std::regex_match(s, m, pattern)) return false;
    const std::chrono::year_month_day date{std::chrono::year(std::stoi(m[1])),
                                           std::chrono::month(static_cast<unsigned>(std::stoi(m[2]))),
                                           std::chrono::day(static_cast<unsigned>(std::stoi(m[3])))};
    return date.ok();
}

bool box_inside_image(const BoundingBox& b, int width, int height) {
    return b.u_min >= -0.5 && b.v_min >= -0.5 && b.u_max <= width - 0.5 && b.v_max <= height - 0.5;
}

}  // namespace

std::string to_string(Ripeness r) { return r == Ripeness::Ripe ? "Ripe" : "Unripe"; }

Ripeness parse_ripeness(const std::string& text) {
    if (text == "Ripe") return Ripeness::Ripe;
    if (text == "Unripe") return Ripeness::Unripe;
    throw Error(ErrorCode::SchemaError, "ripeness must be 'Ripe' or 'Unripe', got '" + text + "'");
}

double Frame::depth_mm(int u, int v) const {
    if (!depth || !depth->inside(u, v)) return 0.0;
    return depth->at(u, v) * intrinsics.depth_scale;
}

std::vector<Frame> load_manifest(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    const json doc = read_json_file(path);
    const std::string top = path.string();
    if (!doc.is_object()) schema_fail(top, "manifest must be a JSON object");
    const json& version = require(doc, "schema_version", top);
    if (!version.is_number_integer() || version.get<int>() != kManifestSchemaVersion) {
        schema_fail(top, "unsupported schema_version (expected 1)");
    }
    const json& frames_json = require(doc, "frames", top);
    if (!frames_json.is_array()) schema_fail(top, "'frames' must be an array");

    const std::filesystem::path base = path.parent_path();
    std::vector<Frame> frames;
    std::set<std::string> frame_ids;
    std::set<std::string> fruit_ids;
    for (const json& fj : frames_json) {
        Frame frame;
        frame.frame_id = require_string(fj, "frame_id", top);
        const std::string where = "frame '" + frame.frame_id + "'";
        if (frame.frame_id.empty()) schema_fail(top, "empty frame_id");
        if (!frame_ids.insert(frame.frame_id).second) schema_fail(where, "duplicate frame_id");

        frame.rgb_path = require_string(fj, "rgb", where);
        frame.depth_path = require_string(fj, "depth", where);
        DepthImage depth;
        std::pair<int, int> rgb_size;
        try {
            depth = read_depth_image(base / frame.depth_path);
            rgb_size = read_image_size(base / frame.rgb_path);
        } catch (const Error& e) {
            throw Error(e.code(), where + ": " + e.what());
        }
        if (rgb_size.first != depth.width || rgb_size.second != depth.height) {
            schema_fail(where, "rgb and depth resolutions differ");
        }
        frame.width = depth.width;
        frame.height = depth.height;
        frame.depth = std::make_shared<const DepthImage>(std::move(depth));

        const json& kj = require(fj, "intrinsics", where);
        const json& pp = require(kj, "principal_point", where);
        if (!pp.is_array() || pp.size() != 2 || !pp[0].is_number() || !pp[1].is_number()) {
            schema_fail(where, "principal_point must be [u0, v0]");
        }
        frame.intrinsics.focal_length_px = require_number(kj, "focal_length_px", where);
        frame.intrinsics.u0 = pp[0].get<double>();
        frame.intrinsics.v0 = pp[1].get<double>();
        frame.intrinsics.depth_scale = require_number(kj, "depth_scale", where);
        try {
            frame.intrinsics.validate();
        } catch (const Error& e) {
            schema_fail(where, e.what());
        }

        if (fj.contains("capture_date") && !fj["capture_date"].is_null()) {
            const json& d = fj["capture_date"];
            if (!d.is_string() || !is_iso_date(d.get<std::string>())) {
                schema_fail(where, "capture_date must be an ISO date YYYY-MM-DD");
            }
            frame.capture_date = d.get<std::string>();
        }

        const json& fruits = require(fj, "fruits", where);
        if (!fruits.is_array()) schema_fail(where, "'fruits' must be an array");
        for (const json& aj : fruits) {
            AnnotatedFruit fruit;
            fruit.fruit_id = require_string(aj, "fruit_id", where);
            const std::string fw = where + " fruit '" + fruit.fruit_id + "'";
            if (fruit.fruit_id.empty()) schema_fail(where, "empty fruit_id");
            if (!fruit_ids.insert(fruit.fruit_id).second) schema_fail(fw, "duplicate fruit_id");
            fruit.box = parse_box(require(aj, "box", fw), fw);
            if (!box_inside_image(fruit.box, frame.width, frame.height)) {
                schema_fail(fw, "box lies outside the image");
            }
            fruit.ripeness = parse_ripeness(require_string(aj, "ripeness", fw));
            if (aj.contains("gt_diameter_mm") && !aj["gt_diameter_mm"].is_null()) {
                const double d = require_number(aj, "gt_diameter_mm", fw);
                if (!(d >= kDiameterHardLo && d <= kDiameterHardHi)) {
                    schema_fail(fw, "gt_diameter_mm " + std::to_string(d) + " outside 5-300 mm");
                }
                if ((d < kDiameterWarnLo || d > kDiameterWarnHi) && warnings) {
                    warnings->push_back(fw + ": gt_diameter_mm " + std::to_string(d) + " outside 20-120 mm");
                }
                fruit.gt_diameter_mm = d;
            }
            if (aj.contains("mask") && !aj["mask"].is_null()) {
                FruitMask mask = parse_mask(aj["mask"], base, frame, fw);
                const auto& ext = mask.extent();
                if (!fruit.box.contains(ext.u_min, ext.v_min) || !fruit.box.contains(ext.u_max, ext.v_max)) {
                    schema_fail(fw, "mask extends outside its box");
                }
                fruit.mask = std::move(mask);
            }
            frame.fruits.push_back(std::move(fruit));
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

void save_manifest(const std::filesystem::path& path, const std::vector<Frame>& frames) {
    json doc;
    doc["schema_version"] = kManifestSchemaVersion;
    doc["frames"] = json::array();
    for (const auto& frame : frames) {
        json fj;
        fj["frame_id"] = frame.frame_id;
        fj["rgb"] = frame.rgb_path;
        fj["depth"] = frame.depth_path;
        fj["intrinsics"] = {{"focal_length_px", frame.intrinsics.focal_length_px},
                            {"principal_point", {frame.intrinsics.u0, frame.intrinsics.v0}},
                            {"depth_scale", frame.intrinsics.depth_scale}};
        if (frame.capture_date) fj["capture_date"] = *frame.capture_date;
        fj["fruits"] = json::array();
        for (const auto& fruit : frame.fruits) {
            json aj;
            aj["fruit_id"] = fruit.fruit_id;
            aj["box"] = box_to_json(fruit.box);
            aj["ripeness"] = to_string(fruit.ripeness);
            if (fruit.gt_diameter_mm) aj["gt_diameter_mm"] = *fruit.gt_diameter_mm;
            if (fruit.mask) aj["mask"] = {{"rle", encode_rle(*fruit.mask, frame.width, frame.height)}};
            fj["fruits"].push_back(std::move(aj));
        }
        doc["frames"].push_back(std::move(fj));
    }
    write_json_file(path, doc);
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path, const std::vector<Frame>* frames) {
    const json doc = read_json_file(path);
    const std::string where = path.string();
    std::vector<DetectionRecord> out;
    if (doc.is_null()) return out;
    if (!doc.is_array()) schema_fail(where, "detections must be a JSON array");

    std::set<std::string> known;
    if (frames) {
        for (const auto& f : *frames) known.insert(f.frame_id);
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& dj = doc[i];
        const std::string w = where + " detection " + std::to_string(i);
        DetectionRecord rec;
        rec.frame_id = require_string(dj, "frame_id", w);
        rec.box = parse_box(require(dj, "box", w), w);
        rec.label = parse_ripeness(require_string(dj, "class", w));
        rec.score = require_number(dj, "score", w);
        if (!(rec.score >= 0.0 && rec.score <= 1.0)) {
            schema_fail(w, "score " + std::to_string(rec.score) + " outside [0, 1]");
        }
        if (frames && !known.contains(rec.frame_id)) {
            throw Error(ErrorCode::ReferentialError, w + ": unknown frame_id '" + rec.frame_id + "'");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void save_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& detections) {
    json doc = json::array();
    for (const auto& d : detections) {
        doc.push_back({{"frame_id", d.frame_id},
                       {"box", box_to_json(d.box)},
                       {"class", to_string(d.label)},
                       {"score", d.score}});
    }
    write_json_file(path, doc);
}

std::map<std::string, std::vector<DetectionRecord>> group_by_frame(const std::vector<DetectionRecord>& detections) {
    std::map<std::string, std::vector<DetectionRecord>> grouped;
    for (const auto& d : detections) grouped[d.frame_id].push_back(d);
    return grouped;
}

std::vector<Pixel> mask_depth_pixels(const Frame& frame, const FruitMask& mask) {
    std::vector<Pixel> out;
    out.reserve(mask.size());
    for (const auto& p : mask.pixels()) {
        const double z = frame.depth_mm(p.u, p.v);
        if (z > 0.0) out.push_back({static_cast<double>(p.u), static_cast<double>(p.v), z});
    }
    return out;
}

FruitMask fallback_segment(const Frame& frame, const BoundingBox& box) {
    box.validate();
    if (!box_inside_image(box, frame.width, frame.height)) {
        throw Error(ErrorCode::InvalidInput, "fallback segmentation box lies outside the frame");
    }
    const int u_lo = static_cast<int>(std::ceil(box.u_min));
    const int v_lo = static_cast<int>(std::ceil(box.v_min));
    const int u_hi = static_cast<int>(std::floor(box.u_max));
    const int v_hi = static_cast<int>(std::floor(box.v_max));
    const int w = u_hi - u_lo + 1;
    const int h = v_hi - v_lo + 1;

    std::vector<double> depths;
    for (int v = v_lo; v <= v_hi; ++v) {
        for (int u = u_lo; u <= u_hi; ++u) {
            const double z = frame.depth_mm(u, v);
            if (z > 0.0) depths.push_back(z);
        }
    }
    if (depths.empty()) {
        throw Error(ErrorCode::EmptyMask, "box contains no valid depth");
    }
    std::sort(depths.begin(), depths.end());
    const std::size_t m = depths.size();
    const double median = m % 2 == 1 ? depths[m / 2] : 0.5 * (depths[m / 2 - 1] + depths[m / 2]);
    const double band = kFallbackBand * median;

    std::vector<char> in_band(static_cast<std::size_t>(w) * h, 0);
    for (int v = v_lo; v <= v_hi; ++v) {
        for (int u = u_lo; u <= u_hi; ++u) {
            const double z = frame.depth_mm(u, v);
            in_band[static_cast<std::size_t>(v - v_lo) * w + (u - u_lo)] = z > 0.0 && std::abs(z - median) <= band;
        }
    }

    // Largest 4-connected component; the first one found in row-major order wins ties.
    std::vector<int> label(in_band.size(), -1);
    std::vector<MaskPixel> best;
    std::vector<MaskPixel> component;
    std::vector<int> stack;
    int next_label = 0;
    for (int start = 0; start < static_cast<int>(in_band.size()); ++start) {
        if (!in_band[start] || label[start] >= 0) continue;
        component.clear();
        stack.assign(1, start);
        label[start] = next_label;
        while (!stack.empty()) {
            const int idx = stack.back();
            stack.pop_back();
            const int x = idx % w;
            const int y = idx / w;
            component.push_back({x + u_lo, y + v_lo});
            const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& nb : nbrs) {
                if (nb[0] < 0 || nb[1] < 0 || nb[0] >= w || nb[1] >= h) continue;
                const int j = nb[1] * w + nb[0];
                if (in_band[j] && label[j] < 0) {
                    label[j] = next_label;
                    stack.push_back(j);
                }
            }
        }
        ++next_label;
        if (component.size() > best.size()) best = component;
    }
    return FruitMask(std::move(best));
}

}  // namespace fruitsize
