#include "fruitsize/estimators_3d.hpp"

#include "fruitsize/diameter.hpp"
#include "fruitsize/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace fruitsize {

namespace {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

Vec3 to_vec(const Point3& p) { return {p.x, p.y, p.z}; }
Point3 to_point(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

constexpr double kDegenerateRelDet = 1e-9;

std::optional<SphereFit> try_circumsphere(const std::array<Point3, 4>& p) {
    const Vec3 origin = to_vec(p[0]);
    Eigen::Matrix3d rows;
    Vec3 rhs;
    double scale = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vec3 d = to_vec(p[i + 1]) - origin;
        rows.row(i) = d.transpose();
        rhs(i) = 0.5 * d.squaredNorm();
        scale = std::max(scale, d.norm());
    }
    if (!(scale > 0.0)) return std::nullopt;
    const double det = rows.determinant();
    if (!(std::abs(det) >= kDegenerateRelDet * scale * scale * scale)) return std::nullopt;

    const Vec3 offset = rows.fullPivLu().solve(rhs);
    SphereFit fit;
    fit.center = to_point(origin + offset);
    fit.radius = offset.norm();
    fit.inlier_count = 4;
    fit.converged = true;
    double sq = 0.0;
    for (const auto& q : p) {
        const double r = (to_vec(q) - to_vec(fit.center)).norm() - fit.radius;
        sq += r * r;
    }
    fit.residual_rms = std::sqrt(sq / 4.0);
    return fit;
}

double geometric_rms(std::span<const Point3> points, const Vec3& center, double radius) {
    double sq = 0.0;
    for (const auto& p : points) {
        const double r = (to_vec(p) - center).norm() - radius;
        sq += r * r;
    }
    return std::sqrt(sq / static_cast<double>(points.size()));
}

// Draws uniformly from [0, n) with rejection so the sequence depends only on the engine.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = 0;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

}  // namespace

void RansacConfig::validate() const {
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidInput, "ransac delta must be positive");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidInput, "ransac needs at least one iteration");
    if (!(inlier_ratio_threshold > 0.0 && inlier_ratio_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidInput, "ransac inlier ratio threshold must be in (0, 1]");
    }
}

double estimate_3d_lseg(std::span<const Point3> points) {
    if (points.size() < 2) {
        throw Error(ErrorCode::InsufficientPoints, "largest segment needs at least 2 points");
    }
    return diameter_3d(points);
}

SphereFit sphere_from_4_points(const Point3& p1, const Point3& p2, const Point3& p3, const Point3& p4) {
    auto fit = try_circumsphere({p1, p2, p3, p4});
    if (!fit) {
        throw Error(ErrorCode::DegenerateSample, "four points are coplanar or coincident");
    }
    return *fit;
}

double sphere_cost(std::span<const Point3> points, const Point3& center, double radius) {
    const Vec3 c = to_vec(center);
    const double r2 = radius * radius;
    double cost = 0.0;
    for (const auto& p : points) {
        const double e = (to_vec(p) - c).squaredNorm() - r2;
        cost += e * e;
    }
    return cost;
}

SphereFit lsq_sphere_fit(std::span<const Point3> points, const LsqOptions& options) {
    const std::size_t n = points.size();
    if (n < kMinLsqPoints) {
        throw Error(ErrorCode::InsufficientPoints, "least-squares sphere fit needs at least " +
                                                       std::to_string(kMinLsqPoints) + " points, got " +
                                                       std::to_string(n));
    }

    // Work relative to the centroid for conditioning.
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : points) centroid += to_vec(p);
    centroid /= static_cast<double>(n);
    std::vector<Vec3> q;
    q.reserve(n);
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        q.push_back(to_vec(p) - centroid);
        scatter += q.back() * q.back().transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
    const Vec3 spread = eig.eigenvalues();
    if (!(spread(2) > 0.0) || spread(0) < 1e-12 * spread(2)) {
        throw Error(ErrorCode::DegenerateGeometry, "point cloud is coplanar");
    }

    // |q - c|^2 - r^2 = |q|^2 - 2 q.c - k with k = r^2 - |c|^2: linear in (c, k).
    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        design.row(static_cast<Eigen::Index>(i)) << 2.0 * q[i].x(), 2.0 * q[i].y(), 2.0 * q[i].z(), 1.0;
        rhs(static_cast<Eigen::Index>(i)) = q[i].squaredNorm();
    }
    const Vec4 linear = design.colPivHouseholderQr().solve(rhs);
    Vec3 c = linear.head<3>();
    const double r2 = linear(3) + c.squaredNorm();
    if (!(r2 > 0.0) || !std::isfinite(r2)) {
        throw Error(ErrorCode::DegenerateGeometry, "algebraic sphere fit has no real radius");
    }
    double r = std::sqrt(r2);

    const auto cost_at = [&](const Vec3& center, double radius) {
        const double rr = radius * radius;
        double cost = 0.0;
        for (const auto& qi : q) {
            const double e = (qi - center).squaredNorm() - rr;
            cost += e * e;
        }
        return cost;
    };

    // Levenberg-style damped Gauss-Newton on (c, r).
    double cost = cost_at(c, r);
    double lambda = options.initial_damping;
    bool converged = false;
    int iterations = 0;
    while (iterations < options.max_iterations) {
        ++iterations;
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Vec4 jte = Vec4::Zero();
        for (const auto& qi : q) {
            const Vec3 d = qi - c;
            const double e = d.squaredNorm() - r * r;
            Vec4 row;
            row << -2.0 * d, -2.0 * r;
            jtj.noalias() += row * row.transpose();
            jte.noalias() += row * e;
        }
        Eigen::Matrix4d damped = jtj;
        damped.diagonal() += lambda * jtj.diagonal();
        const Vec4 step = -damped.ldlt().solve(jte);
        const double scale = std::max(std::sqrt(c.squaredNorm() + r * r), 1e-300);
        const double rel_change = step.norm() / scale;
        if (!step.allFinite()) break;

        const Vec3 c_new = c + step.head<3>();
        const double r_new = r + step(3);
        const double cost_new = cost_at(c_new, r_new);
        if (cost_new < cost) {
            c = c_new;
            r = r_new;
            cost = cost_new;
            lambda = std::max(lambda / 10.0, 1e-12);
        } else {
            lambda *= 10.0;
        }
        if (rel_change < options.relative_tolerance) {
            converged = true;
            break;
        }
    }

    SphereFit fit;
    fit.center = to_point(centroid + c);
    fit.radius = std::abs(r);
    fit.inlier_count = n;
    fit.iterations_used = iterations;
    fit.converged = converged;
    fit.residual_rms = geometric_rms(points, to_vec(fit.center), fit.radius);
    return fit;
}

SphereFit ransac_sphere(std::span<const Point3> points, const RansacConfig& config) {
    config.validate();
    const std::size_t n = points.size();
    if (n < 4) {
        throw Error(ErrorCode::InsufficientPoints, "ransac needs at least 4 points, got " + std::to_string(n));
    }

    std::mt19937_64 rng(config.seed);
    const long max_draws = 10L * config.max_iterations;
    long draws = 0;
    int iterations = 0;

    std::optional<SphereFit> best;
    std::vector<char> best_mask;
    std::vector<char> mask(n);

    while (iterations < config.max_iterations && draws < max_draws) {
        std::array<std::size_t, 4> idx{};
        for (std::size_t k = 0; k < 4; ++k) {
            bool fresh = false;
            while (!fresh) {
                idx[k] = uniform_index(rng, n);
                fresh = std::find(idx.begin(), idx.begin() + static_cast<long>(k), idx[k]) ==
                        idx.begin() + static_cast<long>(k);
            }
        }
        ++draws;
        auto candidate = try_circumsphere({points[idx[0]], points[idx[1]], points[idx[2]], points[idx[3]]});
        if (!candidate) continue;
        ++iterations;

        const Vec3 c = to_vec(candidate->center);
        std::size_t inliers = 0;
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = (to_vec(points[i]) - c).norm() - candidate->radius;
            const bool in = -config.delta < r && r < config.delta;
            mask[i] = in;
            if (in) {
                ++inliers;
                sq += r * r;
            }
        }
        candidate->inlier_count = inliers;
        candidate->residual_rms = inliers > 0 ? std::sqrt(sq / static_cast<double>(inliers)) : 0.0;

        const bool better = !best || inliers > best->inlier_count ||
                            (inliers == best->inlier_count && candidate->residual_rms < best->residual_rms);
        if (better) {
            best = candidate;
            best_mask = mask;
        }
        if (static_cast<double>(best->inlier_count) / static_cast<double>(n) > config.inlier_ratio_threshold) {
            break;
        }
    }
    if (!best) {
        throw Error(ErrorCode::DegenerateGeometry, "every ransac sample was degenerate");
    }

    SphereFit result = *best;
    result.iterations_used = iterations;
    result.converged = true;
    if (config.refit && best->inlier_count >= kMinLsqPoints) {
        std::vector<Point3> inlier_points;
        inlier_points.reserve(best->inlier_count);
        for (std::size_t i = 0; i < n; ++i) {
            if (best_mask[i]) inlier_points.push_back(points[i]);
        }
        try {
            const SphereFit refined = lsq_sphere_fit(inlier_points);
            result.center = refined.center;
            result.radius = refined.radius;
            result.converged = refined.converged;
            const Vec3 c = to_vec(result.center);
            std::size_t inliers = 0;
            double sq = 0.0;
            for (const auto& p : points) {
                const double r = (to_vec(p) - c).norm() - result.radius;
                if (-config.delta < r && r < config.delta) {
                    ++inliers;
                    sq += r * r;
                }
            }
            result.inlier_count = inliers;
            result.residual_rms = inliers > 0 ? std::sqrt(sq / static_cast<double>(inliers)) : 0.0;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateGeometry) throw;
        }
    }
    return result;
}

}  // namespace fruitsize
