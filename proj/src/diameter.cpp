#include "fruitsize/diameter.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace fruitsize {

namespace {

using Vec3 = Eigen::Vector3d;

std::int64_t cross(const MaskPixel& o, const MaskPixel& a, const MaskPixel& b) {
    return static_cast<std::int64_t>(a.u - o.u) * (b.v - o.v) -
           static_cast<std::int64_t>(a.v - o.v) * (b.u - o.u);
}

std::int64_t squared_distance(const MaskPixel& a, const MaskPixel& b) {
    const std::int64_t du = a.u - b.u;
    const std::int64_t dv = a.v - b.v;
    return du * du + dv * dv;
}

double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double max_squared_distance(std::span<const Point3> points, std::span<const std::size_t> subset) {
    double best = 0.0;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const Point3& a = points[subset[i]];
        for (std::size_t j = i + 1; j < subset.size(); ++j) {
            best = std::max(best, squared_distance(a, points[subset[j]]));
        }
    }
    return best;
}

constexpr std::size_t kBruteForceBelow = 64;
// Visibility threshold and the (much wider) band in which points are kept as
// candidates even though the hull did not grow to include them.
constexpr double kVisibleEps = 1e-9;
constexpr double kKeepEps = 1e-6;

class IncrementalHull {
public:
    explicit IncrementalHull(std::span<const Point3> points) : n_(points.size()) {
        Vec3 centroid = Vec3::Zero();
        for (const auto& p : points) centroid += Vec3(p.x, p.y, p.z);
        centroid /= static_cast<double>(n_);
        pts_.reserve(n_);
        double scale = 0.0;
        for (const auto& p : points) {
            pts_.emplace_back(p.x - centroid.x(), p.y - centroid.y(), p.z - centroid.z());
            scale = std::max(scale, pts_.back().cwiseAbs().maxCoeff());
        }
        scale_ = scale;
    }

    /// Returns false when the hull could not be built consistently.
    bool build(std::vector<std::size_t>& near_surface) {
        if (scale_ == 0.0) return false;
        std::array<std::size_t, 4> simplex{};
        if (!initial_simplex(simplex)) return false;

        std::vector<char> used(n_, 0);
        for (auto s : simplex) used[s] = 1;
        const Vec3 inside = 0.25 * (pts_[simplex[0]] + pts_[simplex[1]] + pts_[simplex[2]] + pts_[simplex[3]]);
        const std::array<std::array<int, 3>, 4> tet = {{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
        for (const auto& t : tet) {
            std::size_t a = simplex[t[0]], b = simplex[t[1]], c = simplex[t[2]];
            const Vec3 normal = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
            if (normal.dot(inside - pts_[a]) > 0.0) std::swap(b, c);
            if (!add_face(a, b, c)) return false;
        }

        const double eps_visible = kVisibleEps * scale_;
        const double eps_keep = kKeepEps * scale_;
        std::vector<int> visible;
        std::vector<int> stack;
        std::vector<std::pair<std::size_t, std::size_t>> horizon;
        for (std::size_t i = 0; i < n_; ++i) {
            if (used[i]) continue;
            const Vec3& p = pts_[i];
            int seed = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (int f : alive_) {
                const double d = signed_distance(f, p);
                if (d > best) {
                    best = d;
                    seed = f;
                }
            }
            if (best <= eps_visible) {
                if (best >= -eps_keep) near_surface.push_back(i);
                continue;
            }

            // Flood the visible region from the most visible face so it stays connected.
            visible.clear();
            stack.assign(1, seed);
            faces_[seed].mark = static_cast<long>(i);
            while (!stack.empty()) {
                const int f = stack.back();
                stack.pop_back();
                visible.push_back(f);
                for (int e = 0; e < 3; ++e) {
                    const int g = neighbor(f, e);
                    if (g < 0) return false;
                    if (faces_[g].mark == static_cast<long>(i)) continue;
                    if (signed_distance(g, p) > eps_visible) {
                        faces_[g].mark = static_cast<long>(i);
                        stack.push_back(g);
                    }
                }
            }

            horizon.clear();
            for (int f : visible) {
                for (int e = 0; e < 3; ++e) {
                    const int g = neighbor(f, e);
                    if (faces_[g].mark != static_cast<long>(i)) {
                        horizon.emplace_back(faces_[f].v[e], faces_[f].v[(e + 1) % 3]);
                    }
                }
            }
            for (int f : visible) remove_face(f);
            for (const auto& [a, b] : horizon) {
                if (!add_face(a, b, i)) return false;
            }
            std::erase_if(alive_, [&](int f) { return !faces_[f].alive; });
            used[i] = 1;
        }
        return true;
    }

    std::vector<std::size_t> vertices() const {
        std::vector<std::size_t> out;
        for (int f : alive_) {
            for (auto v : faces_[f].v) out.push_back(v);
        }
        return out;
    }

private:
    struct Face {
        std::array<std::size_t, 3> v{};
        Vec3 normal;
        double offset = 0.0;
        bool alive = true;
        long mark = -1;
    };

    static std::uint64_t key(std::size_t a, std::size_t b) {
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    }

    double signed_distance(int f, const Vec3& p) const {
        return faces_[f].normal.dot(p) - faces_[f].offset;
    }

    int neighbor(int f, int e) const {
        const auto& v = faces_[f].v;
        const auto it = edges_.find(key(v[(e + 1) % 3], v[e]));
        return it == edges_.end() ? -1 : it->second;
    }

    bool add_face(std::size_t a, std::size_t b, std::size_t c) {
        Vec3 normal = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
        const double norm = normal.norm();
        if (!(norm > 1e-12 * scale_ * scale_)) return false;
        normal /= norm;
        const int id = static_cast<int>(faces_.size());
        faces_.push_back({{a, b, c}, normal, normal.dot(pts_[a]), true, -1});
        for (int e = 0; e < 3; ++e) {
            const auto [it, inserted] = edges_.emplace(key(faces_[id].v[e], faces_[id].v[(e + 1) % 3]), id);
            if (!inserted) return false;
        }
        alive_.push_back(id);
        return true;
    }

    void remove_face(int f) {
        faces_[f].alive = false;
        for (int e = 0; e < 3; ++e) {
            edges_.erase(key(faces_[f].v[e], faces_[f].v[(e + 1) % 3]));
        }
    }

    bool initial_simplex(std::array<std::size_t, 4>& s) const {
        const double tiny = 1e-9 * scale_;
        s[0] = 0;
        for (std::size_t i = 1; i < n_; ++i) {
            if (pts_[i].x() < pts_[s[0]].x()) s[0] = i;
        }
        double best = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double d = (pts_[i] - pts_[s[0]]).squaredNorm();
            if (d > best) {
                best = d;
                s[1] = i;
            }
        }
        if (std::sqrt(best) <= tiny) return false;
        const Vec3 axis = (pts_[s[1]] - pts_[s[0]]).normalized();
        best = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double d = axis.cross(pts_[i] - pts_[s[0]]).norm();
            if (d > best) {
                best = d;
                s[2] = i;
            }
        }
        if (best <= tiny) return false;
        const Vec3 normal = (pts_[s[1]] - pts_[s[0]]).cross(pts_[s[2]] - pts_[s[0]]).normalized();
        best = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double d = std::abs(normal.dot(pts_[i] - pts_[s[0]]));
            if (d > best) {
                best = d;
                s[3] = i;
            }
        }
        return best > tiny;
    }

    std::size_t n_;
    double scale_ = 0.0;
    std::vector<Vec3> pts_;
    std::vector<Face> faces_;
    std::vector<int> alive_;
    std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

std::vector<MaskPixel> convex_hull_2d(std::span<const MaskPixel> pixels) {
    std::vector<MaskPixel> pts(pixels.begin(), pixels.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    // Andrew's monotone chain.
    std::vector<MaskPixel> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

std::int64_t squared_diameter_2d(std::span<const MaskPixel> pixels) {
    const auto hull = convex_hull_2d(pixels);
    const std::size_t h = hull.size();
    if (h < 2) return 0;
    if (h == 2) return squared_distance(hull[0], hull[1]);

    std::int64_t best = 0;
    std::size_t j = 1;
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t next = (i + 1) % h;
        while (cross(hull[i], hull[next], hull[(j + 1) % h]) > cross(hull[i], hull[next], hull[j])) {
            j = (j + 1) % h;
        }
        best = std::max({best, squared_distance(hull[i], hull[j]), squared_distance(hull[next], hull[j])});
    }
    return best;
}

double brute_force_diameter_3d(std::span<const Point3> points) {
    std::vector<std::size_t> all(points.size());
    std::iota(all.begin(), all.end(), 0);
    return std::sqrt(max_squared_distance(points, all));
}

std::vector<std::size_t> diameter_candidates_3d(std::span<const Point3> points) {
    std::vector<std::size_t> all(points.size());
    std::iota(all.begin(), all.end(), 0);
    if (points.size() < kBruteForceBelow) return all;

    IncrementalHull hull(points);
    std::vector<std::size_t> candidates;
    if (!hull.build(candidates)) return all;
    auto verts = hull.vertices();
    candidates.insert(candidates.end(), verts.begin(), verts.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    return candidates;
}

double diameter_3d(std::span<const Point3> points) {
    const auto candidates = diameter_candidates_3d(points);
    return std::sqrt(max_squared_distance(points, candidates));
}

}  // namespace fruitsize
