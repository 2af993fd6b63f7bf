#include "fruitsize/importers.hpp"

#include "fruitsize/error.hpp"
#include "fruitsize/raster.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace fruitsize {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::map<long, double> read_diameters(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileError, "cannot open '" + path.string() + "'");
    std::map<long, double> out;
    std::string line;
    std::getline(in, line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::string id, diameter;
        if (!std::getline(row, id, ',') || !std::getline(row, diameter)) {
            throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) + ": expected id,diameter");
        }
        try {
            out[std::stol(id)] = std::stod(diameter);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) + ": bad number");
        }
    }
    return out;
}

// Pixel centers inside any polygon (even-odd rule).
std::vector<MaskPixel> rasterize_polygons(const json& polys, int width, int height) {
    std::vector<MaskPixel> pixels;
    for (const json& poly : polys) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i + 1 < poly.size(); i += 2) {
            xs.push_back(poly[i].get<double>());
            ys.push_back(poly[i + 1].get<double>());
        }
        if (xs.size() < 3) continue;
        const auto [y_lo, y_hi] = std::minmax_element(ys.begin(), ys.end());
        const auto [x_lo, x_hi] = std::minmax_element(xs.begin(), xs.end());
        for (int v = std::max(0, static_cast<int>(*y_lo)); v <= std::min(height - 1, static_cast<int>(*y_hi) + 1); ++v) {
            for (int u = std::max(0, static_cast<int>(*x_lo)); u <= std::min(width - 1, static_cast<int>(*x_hi) + 1); ++u) {
                // COCO polygons use pixel-edge coordinates; test the pixel center.
                const double px = u + 0.5, py = v + 0.5;
                bool inside = false;
                for (std::size_t i = 0, j = xs.size() - 1; i < xs.size(); j = i++) {
                    if ((ys[i] > py) != (ys[j] > py) &&
                        px < (xs[j] - xs[i]) * (py - ys[i]) / (ys[j] - ys[i]) + xs[i]) {
                        inside = !inside;
                    }
                }
                if (inside) pixels.push_back({u, v});
            }
        }
    }
    return pixels;
}

// Uncompressed COCO RLE is column-major.
std::vector<MaskPixel> decode_coco_rle(const json& rle, int width, int height) {
    std::vector<MaskPixel> pixels;
    long cursor = 0;
    bool fg = false;
    for (const json& c : rle.at("counts")) {
        const long n = c.get<long>();
        if (fg) {
            for (long i = cursor; i < cursor + n; ++i) pixels.push_back({static_cast<int>(i / height), static_cast<int>(i % height)});
        }
        cursor += n;
        fg = !fg;
    }
    if (cursor != static_cast<long>(width) * height) throw Error(ErrorCode::SchemaError, "COCO RLE size mismatch");
    return pixels;
}

}  // namespace

std::vector<Frame> import_coco_dataset(const CocoImportOptions& options, const std::filesystem::path& out_dir,
                                       std::vector<std::string>* warnings) {
    options.intrinsics.validate();
    std::ifstream in(options.annotations);
    if (!in) throw Error(ErrorCode::FileError, "cannot open '" + options.annotations.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, options.annotations.string() + ": " + e.what());
    }
    const auto warn = [&](const std::string& w) {
        if (warnings) warnings->push_back(w);
    };

    std::map<long, double> diameters;
    if (options.diameters_csv) diameters = read_diameters(*options.diameters_csv);

    std::map<long, Ripeness> categories;
    for (const json& c : doc.value("categories", json::array())) {
        const std::string name = lower(c.value("name", ""));
        Ripeness r = options.default_ripeness;
        if (name.find("unripe") != std::string::npos) {
            r = Ripeness::Unripe;
        } else if (name.find("ripe") != std::string::npos) {
            r = Ripeness::Ripe;
        }
        categories[c.at("id").get<long>()] = r;
    }

    std::filesystem::create_directories(out_dir);
    const auto out_abs = std::filesystem::absolute(out_dir);
    std::vector<Frame> frames;
    std::map<long, std::size_t> frame_of_image;
    try {
        for (const json& img : doc.at("images")) {
            Frame frame;
            const std::string file = img.at("file_name").get<std::string>();
            const long image_id = img.at("id").get<long>();
            frame.frame_id = std::filesystem::path(file).stem().string();
            const auto rgb = std::filesystem::absolute(options.rgb_dir / file);
            const auto depth = std::filesystem::absolute(
                options.depth_dir / (std::filesystem::path(file).stem().string() + options.depth_suffix));
            if (!std::filesystem::exists(depth)) {
                warn("image " + file + ": no depth file " + depth.string() + ", skipped");
                continue;
            }
            frame.rgb_path = std::filesystem::relative(rgb, out_abs).generic_string();
            frame.depth_path = std::filesystem::relative(depth, out_abs).generic_string();
            frame.width = img.at("width").get<int>();
            frame.height = img.at("height").get<int>();
            frame.intrinsics = options.intrinsics;
            frame_of_image[image_id] = frames.size();
            frames.push_back(std::move(frame));
        }

        for (const json& ann : doc.at("annotations")) {
            const long ann_id = ann.at("id").get<long>();
            const auto fit = frame_of_image.find(ann.at("image_id").get<long>());
            if (fit == frame_of_image.end()) continue;
            Frame& frame = frames[fit->second];
            const json& bbox = ann.at("bbox");
            AnnotatedFruit fruit;
            fruit.fruit_id = frame.frame_id + "_a" + std::to_string(ann_id);
            fruit.box = {bbox[0].get<double>() - 0.5, bbox[1].get<double>() - 0.5,
                         bbox[0].get<double>() + bbox[2].get<double>() - 0.5,
                         bbox[1].get<double>() + bbox[3].get<double>() - 0.5};
            fruit.box.u_min = std::max(fruit.box.u_min, -0.5);
            fruit.box.v_min = std::max(fruit.box.v_min, -0.5);
            fruit.box.u_max = std::min(fruit.box.u_max, frame.width - 0.5);
            fruit.box.v_max = std::min(fruit.box.v_max, frame.height - 0.5);
            if (!(fruit.box.u_max > fruit.box.u_min && fruit.box.v_max > fruit.box.v_min)) {
                warn("annotation " + std::to_string(ann_id) + ": degenerate box, skipped");
                continue;
            }
            const auto cat = categories.find(ann.value("category_id", -1L));
            fruit.ripeness = cat != categories.end() ? cat->second : options.default_ripeness;
            if (const auto d = diameters.find(ann_id); d != diameters.end()) fruit.gt_diameter_mm = d->second;

            if (options.import_masks) {
                for (const auto& key : options.mask_keys) {
                    if (!ann.contains(key)) continue;
                    const json& seg = ann[key];
                    std::vector<MaskPixel> pixels;
                    if (seg.is_array()) {
                        pixels = rasterize_polygons(seg, frame.width, frame.height);
                    } else if (seg.is_object() && seg.contains("counts") && seg["counts"].is_array()) {
                        pixels = decode_coco_rle(seg, frame.width, frame.height);
                    } else {
                        warn("annotation " + std::to_string(ann_id) + ": unsupported mask encoding under '" + key + "'");
                        break;
                    }
                    std::erase_if(pixels, [&](const MaskPixel& p) { return !fruit.box.contains(p.u, p.v); });
                    if (!pixels.empty()) fruit.mask = FruitMask(std::move(pixels));
                    break;
                }
            }
            frame.fruits.push_back(std::move(fruit));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, options.annotations.string() + ": " + e.what());
    }

    const auto manifest = out_dir / "manifest.json";
    save_manifest(manifest, frames);
    return load_manifest(manifest, warnings);
}

CocoImportOptions openaccess_preset() {
    CocoImportOptions o;
    o.import_masks = false;
    return o;
}

CocoImportOptions amodal_preset() {
    CocoImportOptions o;
    o.import_masks = true;
    o.mask_keys = {"modal_segmentation", "visible_segmentation", "segmentation"};
    return o;
}

}  // namespace fruitsize
