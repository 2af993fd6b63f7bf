#include "fruitsize/synthetic.hpp"

#include "fruitsize/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fruitsize {

namespace {

using Vec3 = Eigen::Vector3d;

// Engine-only draws so scenes do not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct Placed {
    Vec3 center;
    double radius;
    Vec3 cap_dir;   // unit, in the image plane (z = 0); zero when unoccluded
    double cap_cut; // hit points with (h - c).cap_dir > cap_cut are hidden
    Ripeness ripeness;
    PixelExtent extent;
};

// Nearest ray parameter (== depth, since the ray has unit z) or +inf.
double intersect(const Vec3& dir, const Vec3& center, double radius) {
    const double a = dir.squaredNorm();
    const double b = -2.0 * dir.dot(center);
    const double c = center.squaredNorm() - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double t = (-b - std::sqrt(disc)) / (2.0 * a);
    return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

Vec3 ray(const CameraIntrinsics& k, int u, int v) {
    return {(u - k.u0) / k.focal_length_px, (v - k.v0) / k.focal_length_px, 1.0};
}

// Conservative pixel extent of a sphere's silhouette from its bounding cube.
bool silhouette_extent(const Vec3& c, double r, const CameraIntrinsics& k, PixelExtent& ext) {
    const double z_near = c.z() - r;
    if (z_near <= 0.0) return false;
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo, v_lo = u_lo, v_hi = -u_lo;
    for (double dz : {-r, r}) {
        for (double dx : {-r, r}) {
            for (double dy : {-r, r}) {
                const double z = c.z() + dz;
                const double u = k.u0 + k.focal_length_px * (c.x() + dx) / z;
                const double v = k.v0 + k.focal_length_px * (c.y() + dy) / z;
                u_lo = std::min(u_lo, u);
                u_hi = std::max(u_hi, u);
                v_lo = std::min(v_lo, v);
                v_hi = std::max(v_hi, v);
            }
        }
    }
    ext = {static_cast<int>(std::floor(u_lo)), static_cast<int>(std::floor(v_lo)),
           static_cast<int>(std::ceil(u_hi)), static_cast<int>(std::ceil(v_hi))};
    return true;
}

bool overlaps(const PixelExtent& a, const PixelExtent& b, int gap) {
    return a.u_min - gap <= b.u_max && b.u_min - gap <= a.u_max && a.v_min - gap <= b.v_max &&
           b.v_min - gap <= a.v_max;
}

}  // namespace

void SceneSpec::validate() const {
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, "scene spec: " + what); };
    if (n_fruits < 0) fail("n_fruits must be non-negative");
    if (!(diameter_min_mm > 0.0 && diameter_min_mm <= diameter_max_mm)) fail("bad diameter range");
    if (!(depth_min_mm > 0.0 && depth_min_mm <= depth_max_mm)) fail("bad depth range");
    if (!(depth_min_mm > diameter_max_mm)) fail("spheres must lie in front of the camera");
    if (!(noise_sigma_mm >= 0.0)) fail("noise sigma must be non-negative");
    if (!(occlusion_fraction >= 0.0 && occlusion_fraction < 1.0)) fail("occlusion fraction must be in [0, 1)");
    if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0)) fail("outlier fraction must be in [0, 1]");
    if (width < 8 || height < 8) fail("image too small");
    if (!(focal_length_px > 0.0) || !(depth_scale > 0.0)) fail("bad camera");
    if ((depth_max_mm + background_offset_mm) / depth_scale > 65535.0) fail("background beyond 16-bit depth range");
    if (!(max_off_axis_deg > 0.0 && max_off_axis_deg < 80.0)) fail("max off-axis angle must be in (0, 80) degrees");
    if (max_placement_attempts < 1) fail("need at least one placement attempt");
}

SyntheticScene generate_synthetic_scene(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const CameraIntrinsics k = CameraIntrinsics::centered(spec.focal_length_px, spec.width, spec.height,
                                                          spec.depth_scale);
    const double max_tan = std::tan(spec.max_off_axis_deg * std::numbers::pi / 180.0);

    std::vector<Placed> placed;
    for (int i = 0; i < spec.n_fruits; ++i) {
        bool ok = false;
        for (int attempt = 0; attempt < spec.max_placement_attempts && !ok; ++attempt) {
            const double radius = 0.5 * rng.uniform(spec.diameter_min_mm, spec.diameter_max_mm);
            const double z = rng.uniform(spec.depth_min_mm, spec.depth_max_mm);
            const double u = rng.uniform(0.0, spec.width - 1.0);
            const double v = rng.uniform(0.0, spec.height - 1.0);
            const Vec3 center((u - k.u0) * z / k.focal_length_px, (v - k.v0) * z / k.focal_length_px, z);
            if (std::hypot(center.x(), center.y()) > max_tan * z) continue;

            PixelExtent ext;
            if (!silhouette_extent(center, radius, k, ext)) continue;
            if (ext.u_min < 1 || ext.v_min < 1 || ext.u_max > spec.width - 2 || ext.v_max > spec.height - 2) continue;
            const bool clash = std::any_of(placed.begin(), placed.end(), [&](const Placed& p) {
                return overlaps(p.extent, ext, spec.separation_px);
            });
            if (clash) continue;

            Placed p{center, radius, Vec3::Zero(), std::numeric_limits<double>::infinity(), Ripeness::Ripe, ext};
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            if (spec.occlusion_fraction > 0.0) {
                p.cap_dir = Vec3(std::cos(angle), std::sin(angle), 0.0);
                p.cap_cut = (1.0 - 2.0 * spec.occlusion_fraction) * radius;
            }
            p.ripeness = rng.uniform() < 0.5 ? Ripeness::Ripe : Ripeness::Unripe;
            placed.push_back(p);
            ok = true;
        }
        if (!ok) {
            throw Error(ErrorCode::PlacementError, "could not place fruit " + std::to_string(i) + " of " +
                                                       std::to_string(spec.n_fruits) + " without overlap");
        }
    }

    SyntheticScene scene;
    scene.depth = DepthImage(spec.width, spec.height);
    scene.rgb = ByteImage(spec.width, spec.height, 3);
    const double background_z = spec.depth_max_mm + spec.background_offset_mm;
    std::vector<double> depth_mm(static_cast<std::size_t>(spec.width) * spec.height, background_z);
    // -1 background, -2 occluder, otherwise fruit index.
    std::vector<int> owner(depth_mm.size(), -1);
    const Vec3 light = Vec3(-0.3, -0.5, -1.0).normalized();

    for (int v = 0; v < spec.height; ++v) {
        for (int u = 0; u < spec.width; ++u) {
            const std::size_t idx = static_cast<std::size_t>(v) * spec.width + u;
            const Vec3 dir = ray(k, u, v);
            double shade = 0.25;
            for (std::size_t f = 0; f < placed.size(); ++f) {
                const Placed& p = placed[f];
                if (u < p.extent.u_min || u > p.extent.u_max || v < p.extent.v_min || v > p.extent.v_max) continue;
                const double t = intersect(dir, p.center, p.radius);
                if (t >= depth_mm[idx]) continue;
                const Vec3 hit = t * dir;
                if ((hit - p.center).dot(p.cap_dir) > p.cap_cut) {
                    // Leaf-like occluder just in front of the fruit.
                    depth_mm[idx] = p.center.z() - p.radius - 20.0;
                    owner[idx] = -2;
                } else {
                    depth_mm[idx] = t;
                    owner[idx] = static_cast<int>(f);
                    shade = std::max(0.15, (hit - p.center).normalized().dot(light));
                }
            }
            std::uint8_t rgb[3] = {70, 60, 40};
            if (owner[idx] == -2) {
                rgb[0] = 40, rgb[1] = 110, rgb[2] = 35;
            } else if (owner[idx] >= 0) {
                const bool ripe = placed[owner[idx]].ripeness == Ripeness::Ripe;
                rgb[0] = static_cast<std::uint8_t>(std::lround((ripe ? 200 : 120) * shade + 30));
                rgb[1] = static_cast<std::uint8_t>(std::lround((ripe ? 30 : 190) * shade + 20));
                rgb[2] = static_cast<std::uint8_t>(std::lround(30 * shade + 10));
            }
            for (int c = 0; c < 3; ++c) scene.rgb.at(u, v, c) = rgb[c];
        }
    }

    // Sensor effects, then quantization.
    for (std::size_t idx = 0; idx < depth_mm.size(); ++idx) {
        if (spec.noise_sigma_mm > 0.0) depth_mm[idx] += spec.noise_sigma_mm * rng.normal();
        if (owner[idx] >= 0 && spec.outlier_fraction > 0.0 && rng.uniform() < spec.outlier_fraction) {
            const Placed& p = placed[owner[idx]];
            depth_mm[idx] = rng.uniform(p.center.z() - p.radius - 100.0, background_z);
        }
        const double raw = std::round(depth_mm[idx] / spec.depth_scale);
        scene.depth.data[idx] = static_cast<std::uint16_t>(std::clamp(raw, 0.0, 65535.0));
    }

    Frame& frame = scene.frame;
    frame.frame_id = spec.frame_id;
    frame.rgb_path = spec.frame_id + "_rgb.png";
    frame.depth_path = spec.frame_id + "_depth.png";
    frame.width = spec.width;
    frame.height = spec.height;
    frame.intrinsics = k;
    for (std::size_t f = 0; f < placed.size(); ++f) {
        std::vector<MaskPixel> pixels;
        const PixelExtent& e = placed[f].extent;
        for (int v = std::max(0, e.v_min); v <= std::min(spec.height - 1, e.v_max); ++v) {
            for (int u = std::max(0, e.u_min); u <= std::min(spec.width - 1, e.u_max); ++u) {
                if (owner[static_cast<std::size_t>(v) * spec.width + u] == static_cast<int>(f)) {
                    pixels.push_back({u, v});
                }
            }
        }
        SphereTruth truth{spec.frame_id + "_f" + std::to_string(f),
                          {placed[f].center.x(), placed[f].center.y(), placed[f].center.z()},
                          placed[f].radius, placed[f].cap_dir.x(), placed[f].cap_dir.y()};
        if (pixels.empty()) {
            // Fully hidden; keep the ground truth but there is nothing to annotate.
            scene.spheres.push_back(truth);
            continue;
        }
        FruitMask mask(std::move(pixels));
        AnnotatedFruit fruit;
        fruit.fruit_id = truth.fruit_id;
        fruit.box = mask.enclosing_box();
        fruit.mask = std::move(mask);
        fruit.ripeness = placed[f].ripeness;
        fruit.gt_diameter_mm = 2.0 * placed[f].radius;
        frame.fruits.push_back(std::move(fruit));
        scene.spheres.push_back(truth);
    }
    frame.depth = std::make_shared<const DepthImage>(scene.depth);
    return scene;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const std::vector<SyntheticScene>& scenes) {
    std::filesystem::create_directories(dir);
    std::vector<Frame> frames;
    for (const auto& s : scenes) {
        write_byte_image(dir / s.frame.rgb_path, s.rgb);
        write_depth_image(dir / s.frame.depth_path, s.depth);
        frames.push_back(s.frame);
    }
    const auto manifest = dir / "manifest.json";
    save_manifest(manifest, frames);
    return manifest;
}

}  // namespace fruitsize
