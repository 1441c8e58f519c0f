#pragma once

// Centroid-distance keypoint detection.
//
// Every point i gets a support region N(i) = { j : |p_i - p_j| < r } (the
// query included). Two saliency measures are derived from it:
//
//   geometric    d_g(i) = || p_i - mean_{j in N(i)} p_j ||_2
//   photometric  d_c(i) = || c_i - mean_{j in N(i)} c_j ||_1
//
// Keypoints are chosen by multi-modal non-maximum suppression: a point is
// discarded when it is below threshold in every modality, and otherwise kept
// when no neighbor has a strictly larger product of saliencies.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fmt/format.h>

#include "ced/cloud.hpp"
#include "ced/error.hpp"
#include "ced/parallel.hpp"
#include "ced/spatial_index.hpp"

namespace ced {

enum class DetectorMode { Ced, Ced3D };

struct DetectorParams {
    /// Support radius r in meters.
    double radius = 0.05;
    /// Geometric threshold as a fraction of the radius, in [0, 1].
    double t_g = 0.2;
    /// Photometric threshold on the L1 color distance, in [0, 3].
    double t_c = 0.5;
    DetectorMode mode = DetectorMode::Ced;
    /// Points with fewer neighbors (query included) get no saliency.
    std::uint32_t min_neighbors = 5;

    /// Radius of five sampling pitches, other values default.
    static DetectorParams for_resolution(double resolution) {
        DetectorParams params;
        params.radius = 5.0 * resolution;
        return params;
    }

    void validate() const {
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw Error(ErrorCode::InvalidParams, fmt::format("radius must be a positive number, got {}", radius));
        if (!(t_g >= 0.0 && t_g <= 1.0))
            throw Error(ErrorCode::InvalidParams, fmt::format("t_g must lie in [0, 1], got {}", t_g));
        if (!(t_c >= 0.0 && t_c <= 3.0))
            throw Error(ErrorCode::InvalidParams, fmt::format("t_c must lie in [0, 3], got {}", t_c));
        if (min_neighbors < 1) throw Error(ErrorCode::InvalidParams, "min_neighbors must be >= 1");
    }

    friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

enum class Modality { Geometric, Photometric, Other };

/// Per-point saliency of one modality, index-aligned with the cloud.
struct SaliencyField {
    Modality modality = Modality::Other;
    std::vector<double> values;
    /// 0 where the support was too small; such points carry value 0.
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return values.size(); }
};

struct SaliencyFields {
    SaliencyField geometric;
    /// Present only in CED mode on colored clouds.
    std::optional<SaliencyField> photometric;
};

struct KeypointSet {
    /// Ascending, unique indices into the source cloud.
    std::vector<std::uint32_t> indices;
    DetectorParams params;
    /// Non-fatal observations about the run (e.g. degenerate saliency).
    std::vector<std::string> diagnostics;

    std::size_t size() const { return indices.size(); }
};

/// Mean position of the listed points (summed in list order).
inline Eigen::Vector3d geometric_centroid(const ColoredPointCloud& cloud, std::span<const std::uint32_t> neighbors) {
    if (neighbors.empty()) throw Error(ErrorCode::EmptyNeighborhood, "centroid of an empty neighborhood");
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;
    for (std::uint32_t j : neighbors) {
        const ColoredPoint& p = cloud.points[j];
        sx += p.gx;
        sy += p.gy;
        sz += p.gz;
    }
    const double n = static_cast<double>(neighbors.size());
    return {sx / n, sy / n, sz / n};
}

/// Mean color of the listed points (summed in list order).
inline Eigen::Vector3d photometric_centroid(const ColoredPointCloud& cloud,
                                            std::span<const std::uint32_t> neighbors) {
    if (!cloud.has_color) throw Error(ErrorCode::NoColor, "cloud carries no color");
    if (neighbors.empty()) throw Error(ErrorCode::EmptyNeighborhood, "centroid of an empty neighborhood");
    double sr = 0.0;
    double sg = 0.0;
    double sb = 0.0;
    for (std::uint32_t j : neighbors) {
        const ColoredPoint& p = cloud.points[j];
        sr += p.r;
        sg += p.g;
        sb += p.b;
    }
    const double n = static_cast<double>(neighbors.size());
    return {sr / n, sg / n, sb / n};
}

inline double geometric_distance(const ColoredPoint& p, const Eigen::Vector3d& centroid) {
    const double dx = p.gx - centroid.x();
    const double dy = p.gy - centroid.y();
    const double dz = p.gz - centroid.z();
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double photometric_distance(const ColoredPoint& p, const Eigen::Vector3d& centroid) {
    return std::abs(p.r - centroid.x()) + std::abs(p.g - centroid.y()) + std::abs(p.b - centroid.z());
}

/// Support regions of every point. Chunks are gathered independently and
/// concatenated in index order, so the result does not depend on `workers`.
inline Neighborhoods build_neighborhoods(const ColoredPointCloud& cloud, const KdTree& tree, double radius,
                                         unsigned workers = 1) {
    if (!(radius > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "radius must be > 0");
    if (tree.size() != cloud.size()) throw Error(ErrorCode::IndexOutOfRange, "index was built over another cloud");
    const std::size_t n = cloud.size();
    std::vector<std::vector<std::uint32_t>> chunk_indices(chunk_count(n, workers));
    std::vector<std::size_t> counts(n);

    parallel_for_chunks(n, workers, [&](std::size_t begin, std::size_t end, unsigned chunk) {
        std::vector<std::uint32_t> buffer;
        auto& local = chunk_indices[chunk];
        for (std::size_t i = begin; i < end; ++i) {
            tree.radius_neighbors(cloud, i, radius, buffer);
            counts[i] = buffer.size();
            local.insert(local.end(), buffer.begin(), buffer.end());
        }
    });

    Neighborhoods out;
    out.offsets.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) out.offsets[i + 1] = out.offsets[i] + counts[i];
    out.indices.reserve(out.offsets[n]);
    for (auto& local : chunk_indices) {
        out.indices.insert(out.indices.end(), local.begin(), local.end());
        std::vector<std::uint32_t>().swap(local);
    }
    return out;
}

/// Saliency fields over precomputed support regions.
inline SaliencyFields compute_saliency(const ColoredPointCloud& cloud, const Neighborhoods& neighborhoods,
                                       const DetectorParams& params, unsigned workers = 1) {
    params.validate();
    if (neighborhoods.size() != cloud.size())
        throw Error(ErrorCode::MisalignedFields, "neighborhoods do not match the cloud");
    const bool photometric = params.mode == DetectorMode::Ced && cloud.has_color;
    const std::size_t n = cloud.size();

    SaliencyFields fields;
    fields.geometric.modality = Modality::Geometric;
    fields.geometric.values.assign(n, 0.0);
    fields.geometric.valid.assign(n, 0);
    if (photometric) {
        fields.photometric.emplace();
        fields.photometric->modality = Modality::Photometric;
        fields.photometric->values.assign(n, 0.0);
        fields.photometric->valid.assign(n, 0);
    }

    parallel_for_chunks(n, workers, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto support = neighborhoods[i];
            if (support.size() < params.min_neighbors) continue;
            const ColoredPoint& p = cloud.points[i];
            fields.geometric.values[i] = geometric_distance(p, geometric_centroid(cloud, support));
            fields.geometric.valid[i] = 1;
            if (photometric) {
                fields.photometric->values[i] = photometric_distance(p, photometric_centroid(cloud, support));
                fields.photometric->valid[i] = 1;
            }
        }
    });
    return fields;
}

/// Builds the support regions with `tree` and evaluates the saliency fields.
inline SaliencyFields compute_saliency(const ColoredPointCloud& cloud, const KdTree& tree,
                                       const DetectorParams& params, unsigned workers = 1) {
    params.validate();
    return compute_saliency(cloud, build_neighborhoods(cloud, tree, params.radius, workers), params, workers);
}

/// Non-maximum suppression over any number of index-aligned modalities.
///
/// Point i is selected iff it is valid in every field, reaches the threshold
/// in at least one modality (field >= threshold), and no valid neighbor has a
/// strictly larger product of field values. Products multiply the fields in
/// the order given.
inline std::vector<std::uint32_t> multimodal_nms(std::span<const SaliencyField* const> fields,
                                                 std::span<const double> thresholds,
                                                 const Neighborhoods& neighborhoods, unsigned workers = 1) {
    if (fields.empty()) throw Error(ErrorCode::MisalignedFields, "at least one saliency field is required");
    if (thresholds.size() != fields.size())
        throw Error(ErrorCode::MisalignedFields, "one threshold per saliency field is required");
    const std::size_t n = fields[0]->size();
    for (const SaliencyField* f : fields)
        if (f->values.size() != n || f->valid.size() != n)
            throw Error(ErrorCode::MisalignedFields, "saliency fields differ in length");
    if (neighborhoods.size() != n) throw Error(ErrorCode::MisalignedFields, "neighborhoods differ in length");

    std::vector<double> product(n, 0.0);
    std::vector<std::uint8_t> valid(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double prod = fields[0]->values[i];
        for (std::size_t m = 1; m < fields.size(); ++m) prod *= fields[m]->values[i];
        product[i] = prod;
        for (const SaliencyField* f : fields) valid[i] = valid[i] && f->valid[i];
    }

    std::vector<std::uint8_t> selected(n, 0);
    parallel_for_chunks(n, workers, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) {
            if (!valid[i]) continue;
            bool salient = false;
            for (std::size_t m = 0; m < fields.size() && !salient; ++m)
                salient = !(fields[m]->values[i] < thresholds[m]);
            if (!salient) continue;
            bool maximum = true;
            for (std::uint32_t j : neighborhoods[i]) {
                if (valid[j] && product[i] < product[j]) {
                    maximum = false;
                    break;
                }
            }
            selected[i] = maximum;
        }
    });

    std::vector<std::uint32_t> keypoints;
    for (std::size_t i = 0; i < n; ++i)
        if (selected[i]) keypoints.push_back(static_cast<std::uint32_t>(i));
    return keypoints;
}

struct Detection {
    KeypointSet keypoints;
    SaliencyFields saliency;
};

/// Full pipeline: index, support regions, saliency, suppression. `workers`
/// only changes speed; the output is identical for every worker count.
inline Detection detect_with_saliency(const ColoredPointCloud& cloud, const DetectorParams& params,
                                      unsigned workers = 1) {
    params.validate();
    if (params.mode == DetectorMode::Ced && !cloud.has_color)
        throw Error(ErrorCode::NoColor, "CED mode needs a colored cloud; use CED-3D for geometry only");

    Detection result;
    result.keypoints.params = params;
    if (cloud.empty()) return result;

    const KdTree tree(cloud);
    const Neighborhoods neighborhoods = build_neighborhoods(cloud, tree, params.radius, workers);
    result.saliency = compute_saliency(cloud, neighborhoods, params, workers);

    if (params.mode == DetectorMode::Ced) {
        const SaliencyField& dc = *result.saliency.photometric;
        double largest = 0.0;
        for (std::size_t i = 0; i < dc.size(); ++i)
            if (dc.valid[i]) largest = std::max(largest, dc.values[i]);
        if (largest <= 1e-12)
            result.keypoints.diagnostics.push_back(
                "photometric saliency is zero everywhere (uniform color); every point passing the geometric "
                "threshold has a zero product and survives suppression. Consider CED-3D mode.");
        const std::array<const SaliencyField*, 2> fields{&result.saliency.geometric, &dc};
        const std::array<double, 2> thresholds{params.t_g * params.radius, params.t_c};
        result.keypoints.indices = multimodal_nms(fields, thresholds, neighborhoods, workers);
    } else {
        const std::array<const SaliencyField*, 1> fields{&result.saliency.geometric};
        const std::array<double, 1> thresholds{params.t_g * params.radius};
        result.keypoints.indices = multimodal_nms(fields, thresholds, neighborhoods, workers);
    }
    return result;
}

inline KeypointSet detect(const ColoredPointCloud& cloud, const DetectorParams& params, unsigned workers = 1) {
    return detect_with_saliency(cloud, params, workers).keypoints;
}

}  // namespace ced
