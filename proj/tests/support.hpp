#pragma once

#include "fruitsize/camera.hpp"
#include "fruitsize/mask.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace testing_support {

using fruitsize::MaskPixel;
using fruitsize::Point3;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("fruitsize_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::int64_t brute_force_sq_diameter_2d(const std::vector<MaskPixel>& px) {
    std::int64_t best = 0;
    for (std::size_t i = 0; i < px.size(); ++i) {
        for (std::size_t j = i + 1; j < px.size(); ++j) {
            const std::int64_t du = px[i].u - px[j].u;
            const std::int64_t dv = px[i].v - px[j].v;
            best = std::max(best, du * du + dv * dv);
        }
    }
    return best;
}

inline double brute_force_diameter(const std::vector<Point3>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, dz = pts[i].z - pts[j].z;
            best = std::max(best, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    }
    return best;
}

enum class Coverage { Full, Half, Quarter };

/// Points on a sphere. Half keeps z <= c.z (the side facing a camera at the
/// origin); quarter additionally keeps x <= c.x.
inline std::vector<Point3> sample_sphere(const Point3& c, double r, std::size_t n, Coverage coverage,
                                         std::mt19937_64& rng, double sigma = 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Point3> out;
    while (out.size() < n) {
        double x = gauss(rng), y = gauss(rng), z = gauss(rng);
        const double len = std::sqrt(x * x + y * y + z * z);
        if (len < 1e-12) continue;
        x /= len, y /= len, z /= len;
        if (coverage != Coverage::Full && z > 0.0) continue;
        if (coverage == Coverage::Quarter && x > 0.0) continue;
        const double rr = r + (sigma > 0.0 ? sigma * gauss(rng) : 0.0);
        out.push_back({c.x + rr * x, c.y + rr * y, c.z + rr * z});
    }
    return out;
}

/// Appends uniform outliers from the cube of half-width `half` around `c` so they
/// make up `fraction` of the result, then shuffles.
inline std::vector<Point3> with_box_outliers(std::vector<Point3> pts, double fraction, const Point3& c, double half,
                                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-half, half);
    const auto n_out = static_cast<std::size_t>(std::round(pts.size() * fraction / (1.0 - fraction)));
    for (std::size_t i = 0; i < n_out; ++i) pts.push_back({c.x + u(rng), c.y + u(rng), c.z + u(rng)});
    std::shuffle(pts.begin(), pts.end(), rng);
    return pts;
}

/// Lattice disk of radius r centred at (cu, cv), pixel centers inside or on the circle.
inline std::vector<MaskPixel> disk_pixels(double cu, double cv, double r) {
    std::vector<MaskPixel> out;
    for (int v = static_cast<int>(std::floor(cv - r)); v <= static_cast<int>(std::ceil(cv + r)); ++v) {
        for (int u = static_cast<int>(std::floor(cu - r)); u <= static_cast<int>(std::ceil(cu + r)); ++u) {
            if ((u - cu) * (u - cu) + (v - cv) * (v - cv) <= r * r) out.push_back({u, v});
        }
    }
    return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_support
