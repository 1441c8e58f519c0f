#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ced/cloud.hpp"
#include "ced/error.hpp"

namespace ced {

/// Squared Euclidean distance. Every inclusion test in the library (radius
/// neighborhoods, repeatability matching) uses `squared_distance < r * r`,
/// so boundary ties resolve the same way everywhere.
inline double squared_distance(const ColoredPoint& a, const Eigen::Vector3d& b) {
    const double dx = a.gx - b.x();
    const double dy = a.gy - b.y();
    const double dz = a.gz - b.z();
    return dx * dx + dy * dy + dz * dz;
}

inline double squared_distance(const ColoredPoint& a, const ColoredPoint& b) {
    return squared_distance(a, Eigen::Vector3d(b.gx, b.gy, b.gz));
}

/// Immutable k-d tree over the geometric components of a cloud.
///
/// The tree stores only a permutation of point indices and split planes; the
/// cloud itself is passed to every query and is never copied or reordered.
/// Queries are exact and return source indices.
class KdTree {
public:
    static constexpr std::uint32_t kDefaultLeafSize = 12;

    explicit KdTree(const ColoredPointCloud& cloud, std::uint32_t leaf_size = kDefaultLeafSize)
        : size_(cloud.size()), leaf_size_(std::max<std::uint32_t>(leaf_size, 1)) {
        if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "cannot index an empty cloud");
        order_.resize(size_);
        std::iota(order_.begin(), order_.end(), 0U);
        nodes_.reserve(2 * (size_ / leaf_size_ + 1));
        build(cloud, 0, static_cast<std::uint32_t>(size_));
    }

    std::size_t size() const { return size_; }

    /// Indices j with |p_query - p_j| < r (strict), including the query point
    /// itself, in ascending order.
    std::vector<std::uint32_t> radius_neighbors(const ColoredPointCloud& cloud, std::size_t query_index,
                                                double radius) const {
        std::vector<std::uint32_t> out;
        radius_neighbors(cloud, query_index, radius, out);
        return out;
    }

    /// Same as above, reusing the caller's buffer.
    void radius_neighbors(const ColoredPointCloud& cloud, std::size_t query_index, double radius,
                          std::vector<std::uint32_t>& out) const {
        if (query_index >= size_ || cloud.size() != size_)
            throw Error(ErrorCode::IndexOutOfRange, "query index outside the indexed cloud");
        radius_search(cloud, cloud.points[query_index].position(), radius, out);
    }

    /// All indices strictly within `radius` of an arbitrary position, ascending.
    void radius_search(const ColoredPointCloud& cloud, const Eigen::Vector3d& center, double radius,
                       std::vector<std::uint32_t>& out) const {
        if (!(radius > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "radius must be > 0");
        out.clear();
        const double r2 = radius * radius;
        search(cloud, 0, center, r2, out);
        std::sort(out.begin(), out.end());
    }

    struct Nearest {
        std::uint32_t index;
        double squared_distance;
    };

    /// Closest indexed point (smallest index on ties).
    Nearest nearest(const ColoredPointCloud& cloud, const Eigen::Vector3d& query) const {
        Nearest best{0, std::numeric_limits<double>::infinity()};
        nearest(cloud, 0, query, best);
        return best;
    }

private:
    struct Node {
        std::uint32_t begin;
        std::uint32_t end;
        // Leaf when left == 0 (the root is never anyone's child).
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        int axis = 0;
        double split = 0.0;
    };

    static double coord(const ColoredPoint& p, int axis) { return axis == 0 ? p.gx : (axis == 1 ? p.gy : p.gz); }

    std::uint32_t build(const ColoredPointCloud& cloud, std::uint32_t begin, std::uint32_t end) {
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({begin, end});
        if (end - begin <= leaf_size_) return id;

        Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
        Eigen::Vector3d hi = -lo;
        for (std::uint32_t k = begin; k < end; ++k) {
            const Eigen::Vector3d p = cloud.points[order_[k]].position();
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        int axis = 0;
        (hi - lo).maxCoeff(&axis);
        if (hi[axis] == lo[axis]) return id;  // all points coincide

        const std::uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return coord(cloud.points[a], axis) < coord(cloud.points[b], axis);
                         });
        // Left holds coordinates <= split, right holds coordinates >= split.
        const double split = coord(cloud.points[order_[mid]], axis);
        const std::uint32_t left = build(cloud, begin, mid);
        const std::uint32_t right = build(cloud, mid, end);
        Node& node = nodes_[id];
        node.left = left;
        node.right = right;
        node.axis = axis;
        node.split = split;
        return id;
    }

    void search(const ColoredPointCloud& cloud, std::uint32_t id, const Eigen::Vector3d& center, double r2,
                std::vector<std::uint32_t>& out) const {
        const Node& node = nodes_[id];
        if (node.left == 0) {
            for (std::uint32_t k = node.begin; k < node.end; ++k) {
                const std::uint32_t idx = order_[k];
                if (squared_distance(cloud.points[idx], center) < r2) out.push_back(idx);
            }
            return;
        }
        // The per-axis difference to the split plane never exceeds (in
        // floating point as well) the difference to any point beyond it, so
        // pruning on diff^2 >= r2 cannot drop a point that passes the test.
        const double diff = center[node.axis] - node.split;
        const bool go_left_first = diff <= 0.0;
        const std::uint32_t first = go_left_first ? node.left : node.right;
        const std::uint32_t second = go_left_first ? node.right : node.left;
        search(cloud, first, center, r2, out);
        if (diff * diff < r2) search(cloud, second, center, r2, out);
    }

    void nearest(const ColoredPointCloud& cloud, std::uint32_t id, const Eigen::Vector3d& query,
                 Nearest& best) const {
        const Node& node = nodes_[id];
        if (node.left == 0) {
            for (std::uint32_t k = node.begin; k < node.end; ++k) {
                const std::uint32_t idx = order_[k];
                const double d2 = squared_distance(cloud.points[idx], query);
                if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index))
                    best = {idx, d2};
            }
            return;
        }
        const double diff = query[node.axis] - node.split;
        const bool go_left_first = diff <= 0.0;
        nearest(cloud, go_left_first ? node.left : node.right, query, best);
        if (diff * diff <= best.squared_distance) nearest(cloud, go_left_first ? node.right : node.left, query, best);
    }

    std::size_t size_;
    std::uint32_t leaf_size_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Exact neighbors of every point, stored compactly (CSR layout).
struct Neighborhoods {
    std::vector<std::size_t> offsets;  // size n + 1
    std::vector<std::uint32_t> indices;

    std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }

    std::span<const std::uint32_t> operator[](std::size_t i) const {
        return {indices.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
};

/// Median nearest-neighbor spacing; a fallback resolution for files that do
/// not declare one. Returns 0 when it cannot be determined.
inline double estimate_resolution(const ColoredPointCloud& cloud) {
    if (cloud.size() < 2) return 0.0;
    // Nearest distinct neighbor on a subsample of queries, found by growing
    // a radius until something other than coincident points shows up.
    const KdTree tree(cloud);
    std::vector<double> spacing;
    spacing.reserve(cloud.size());
    std::vector<std::uint32_t> buffer;
    Eigen::Vector3d lo = cloud.points[0].position();
    Eigen::Vector3d hi = lo;
    for (const auto& p : cloud.points) {
        lo = lo.cwiseMin(p.position());
        hi = hi.cwiseMax(p.position());
    }
    const double diagonal = (hi - lo).norm();
    if (!(diagonal > 0.0)) return 0.0;
    const std::size_t stride = std::max<std::size_t>(1, cloud.size() / 2000);
    for (std::size_t i = 0; i < cloud.size(); i += stride) {
        double radius = diagonal / std::cbrt(static_cast<double>(cloud.size())) / 4.0;
        while (true) {
            tree.radius_neighbors(cloud, i, radius, buffer);
            double best = std::numeric_limits<double>::infinity();
            for (std::uint32_t j : buffer) {
                const double d2 = squared_distance(cloud.points[i], cloud.points[j]);
                if (d2 > 0.0) best = std::min(best, d2);
            }
            if (std::isfinite(best)) {
                spacing.push_back(std::sqrt(best));
                break;
            }
            if (radius > 2.0 * diagonal) break;
            radius *= 2.0;
        }
    }
    if (spacing.empty()) return 0.0;
    auto mid = spacing.begin() + static_cast<std::ptrdiff_t>(spacing.size() / 2);
    std::nth_element(spacing.begin(), mid, spacing.end());
    return *mid;
}

}  // namespace ced
