#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "ced/error.hpp"
#include "ced/random.hpp"

namespace ced {

/// One sample of a colored cloud: position in meters and RGB in [0, 1].
struct ColoredPoint {
    double gx = 0.0;
    double gy = 0.0;
    double gz = 0.0;
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    Eigen::Vector3d position() const { return {gx, gy, gz}; }
    Eigen::Vector3d color() const { return {r, g, b}; }

    void set_position(const Eigen::Vector3d& p) {
        gx = p.x();
        gy = p.y();
        gz = p.z();
    }

    bool is_finite() const {
        return std::isfinite(gx) && std::isfinite(gy) && std::isfinite(gz) && std::isfinite(r) &&
               std::isfinite(g) && std::isfinite(b);
    }

    friend bool operator==(const ColoredPoint&, const ColoredPoint&) = default;
};

/// Ordered point collection. Point indices are the identifiers used by every
/// downstream structure (spatial index, saliency fields, keypoint sets).
struct ColoredPointCloud {
    std::vector<ColoredPoint> points;
    /// Sampling pitch in meters.
    double resolution = 0.01;
    bool has_color = true;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const ColoredPoint& operator[](std::size_t i) const { return points[i]; }

    friend bool operator==(const ColoredPointCloud&, const ColoredPointCloud&) = default;
};

/// Element of SE(3).
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }

    static RigidTransform translation_only(const Eigen::Vector3d& t) {
        RigidTransform T;
        T.translation = t;
        return T;
    }

    /// Rotation orthonormal and proper within `tolerance`.
    bool is_valid(double tolerance = 1e-9) const {
        if (!rotation.allFinite() || !translation.allFinite()) return false;
        const double ortho =
            (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
        return ortho <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
    }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        RigidTransform inv;
        inv.rotation = rotation.transpose();
        inv.translation = -(inv.rotation * translation);
        return inv;
    }
};

/// Rotation from a uniformly distributed unit quaternion (Shoemake's
/// subgroup algorithm) and translation uniform in [-max_translation,
/// max_translation] per axis.
inline RigidTransform random_rigid_transform(Engine& engine, double max_translation = 1.0) {
    const double u1 = uniform01(engine);
    const double u2 = uniform01(engine);
    const double u3 = uniform01(engine);
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    const double two_pi = 2.0 * std::numbers::pi;
    Eigen::Quaterniond q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                         a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
    q.normalize();
    RigidTransform T;
    T.rotation = q.toRotationMatrix();
    for (int axis = 0; axis < 3; ++axis)
        T.translation[axis] = uniform(engine, -max_translation, max_translation);
    return T;
}

/// Keeps exactly the points whose six fields are finite, in original order.
inline ColoredPointCloud remove_invalid(const ColoredPointCloud& cloud) {
    ColoredPointCloud out;
    out.resolution = cloud.resolution;
    out.has_color = cloud.has_color;
    out.points.reserve(cloud.size());
    std::copy_if(cloud.points.begin(), cloud.points.end(), std::back_inserter(out.points),
                 [](const ColoredPoint& p) { return p.is_finite(); });
    return out;
}

using VoxelKey = std::array<std::int64_t, 3>;

inline VoxelKey voxel_key(const ColoredPoint& p, double leaf) {
    return {static_cast<std::int64_t>(std::floor(p.gx / leaf)),
            static_cast<std::int64_t>(std::floor(p.gy / leaf)),
            static_cast<std::int64_t>(std::floor(p.gz / leaf))};
}

/// Replaces the points of every occupied cubic voxel (half-open cells of edge
/// `leaf`) by their mean in all six fields. Output is sorted by voxel key;
/// member sums run in ascending source-index order.
inline ColoredPointCloud voxel_downsample(const ColoredPointCloud& cloud, double leaf) {
    if (!(leaf > 0.0)) throw Error(ErrorCode::NonPositiveLeaf, "leaf size must be > 0");

    std::vector<std::pair<VoxelKey, std::uint32_t>> keyed;
    keyed.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        keyed.emplace_back(voxel_key(cloud.points[i], leaf), static_cast<std::uint32_t>(i));
    std::sort(keyed.begin(), keyed.end());

    ColoredPointCloud out;
    out.resolution = leaf;
    out.has_color = cloud.has_color;
    for (std::size_t begin = 0; begin < keyed.size();) {
        std::size_t end = begin;
        std::array<double, 6> sum{};
        while (end < keyed.size() && keyed[end].first == keyed[begin].first) {
            const ColoredPoint& p = cloud.points[keyed[end].second];
            sum[0] += p.gx;
            sum[1] += p.gy;
            sum[2] += p.gz;
            sum[3] += p.r;
            sum[4] += p.g;
            sum[5] += p.b;
            ++end;
        }
        const double n = static_cast<double>(end - begin);
        out.points.push_back({sum[0] / n, sum[1] / n, sum[2] / n, sum[3] / n, sum[4] / n, sum[5] / n});
        begin = end;
    }
    return out;
}

inline ColoredPointCloud apply_rigid_transform(const ColoredPointCloud& cloud, const RigidTransform& T) {
    if (!T.is_valid()) throw Error(ErrorCode::InvalidTransform, "rotation is not a proper orthonormal matrix");
    ColoredPointCloud out = cloud;
    for (ColoredPoint& p : out.points) p.set_position(T.apply(p.position()));
    return out;
}

/// Adds i.i.d. N(0, sigma^2) to every geometric coordinate. Colors untouched.
inline ColoredPointCloud add_gaussian_noise(const ColoredPointCloud& cloud, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw Error(ErrorCode::NegativeSigma, "sigma must be >= 0");
    ColoredPointCloud out = cloud;
    if (sigma == 0.0) return out;
    Engine engine(seed);
    NormalSampler normal;
    for (ColoredPoint& p : out.points) {
        p.gx += sigma * normal(engine);
        p.gy += sigma * normal(engine);
        p.gz += sigma * normal(engine);
    }
    return out;
}

}  // namespace ced
