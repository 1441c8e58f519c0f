#pragma once

// Evaluation protocols: repeatability under rigid motion and noise,
// single-thread runtime, and threshold sweeps.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fmt/format.h>

#include "ced/baseline.hpp"
#include "ced/cloud.hpp"
#include "ced/detector.hpp"
#include "ced/error.hpp"
#include "ced/random.hpp"
#include "ced/spatial_index.hpp"

namespace ced {

enum class DetectorKind { Ced, Ced3D, Random };

/// A detector the harness can run repeatedly.
struct DetectorConfig {
    DetectorKind kind = DetectorKind::Ced;
    DetectorParams params;
    /// Keypoints drawn by the random detector.
    std::size_t random_count = 0;
    std::uint64_t seed = 7;
    /// Random detector only: draw a fresh sample for every cloud it sees.
    /// When false the detector is deterministic (same seed every call).
    bool reseed_per_cloud = true;
    unsigned threads = 1;

    static DetectorConfig ced(const DetectorParams& params) {
        DetectorConfig config;
        config.kind = params.mode == DetectorMode::Ced ? DetectorKind::Ced : DetectorKind::Ced3D;
        config.params = params;
        return config;
    }

    static DetectorConfig random(std::size_t count, std::uint64_t seed) {
        DetectorConfig config;
        config.kind = DetectorKind::Random;
        config.random_count = count;
        config.seed = seed;
        return config;
    }

    bool deterministic() const { return kind != DetectorKind::Random || !reseed_per_cloud; }
};

/// Runs the detector. `stream` distinguishes the clouds a randomized detector
/// is applied to; deterministic detectors ignore it.
inline KeypointSet run_detector(const DetectorConfig& config, const ColoredPointCloud& cloud,
                                std::uint64_t stream = 0) {
    switch (config.kind) {
        case DetectorKind::Ced:
        case DetectorKind::Ced3D: {
            DetectorParams params = config.params;
            params.mode = config.kind == DetectorKind::Ced ? DetectorMode::Ced : DetectorMode::Ced3D;
            return detect(cloud, params, config.threads);
        }
        case DetectorKind::Random: {
            const std::uint64_t seed = config.reseed_per_cloud ? mix_seed(config.seed, stream) : config.seed;
            return detect_random(cloud, config.random_count, seed);
        }
    }
    throw Error(ErrorCode::InvalidConfig, "unknown detector kind");
}

struct RepeatabilityConfig {
    /// Match radius in meters.
    double epsilon = 0.02;
    /// Standard deviation of the Gaussian noise added to the moved cloud.
    double sigma = 0.005;
    std::uint64_t transform_seed = 11;
    std::uint64_t noise_seed = 13;
    std::size_t trials = 10;
    /// Largest per-axis translation of the sampled transforms.
    double max_translation = 1.0;
    /// Use this transform in every trial instead of sampling one.
    std::optional<RigidTransform> fixed_transform;

    /// epsilon = 2 x resolution, sigma = resolution / 2.
    static RepeatabilityConfig for_resolution(double resolution) {
        RepeatabilityConfig config;
        config.epsilon = 2.0 * resolution;
        config.sigma = 0.5 * resolution;
        return config;
    }

    void validate() const {
        if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be > 0");
        if (!(sigma >= 0.0)) throw Error(ErrorCode::NegativeSigma, "sigma must be >= 0");
        if (trials < 1) throw Error(ErrorCode::InvalidConfig, "at least one trial is required");
        if (fixed_transform && !fixed_transform->is_valid())
            throw Error(ErrorCode::InvalidTransform, "fixed transform is not rigid");
    }
};

struct TrialResult {
    std::size_t keypoints_source = 0;
    std::size_t keypoints_moved = 0;
    std::size_t repeatable = 0;
    double repeatability = 0.0;
};

struct RepeatabilityReport {
    /// |K_P| summed over trials.
    std::size_t total_keypoints = 0;
    std::size_t repeatable_keypoints = 0;
    /// Mean of the per-trial fractions. Equals repeatable / total whenever
    /// |K_P| is the same in every trial, which holds for all built-in
    /// detectors.
    double relative_repeatability = 0.0;
    /// Set when some trial had no source keypoints (its repeatability is 0).
    bool empty_keypoints = false;
    /// Mean wall-clock seconds per detector call on one cloud.
    double detect_time_seconds = 0.0;
    std::vector<TrialResult> trials;
};

/// Number of source keypoints whose moved position has its nearest moved
/// keypoint strictly closer than epsilon. Matching is one-directional and
/// many-to-one.
inline std::size_t count_repeatable(std::span<const Eigen::Vector3d> source_keypoints, const RigidTransform& T,
                                    std::span<const Eigen::Vector3d> moved_keypoints, double epsilon) {
    if (source_keypoints.empty() || moved_keypoints.empty()) return 0;
    ColoredPointCloud targets;
    targets.points.reserve(moved_keypoints.size());
    for (const auto& q : moved_keypoints) targets.points.push_back({q.x(), q.y(), q.z()});
    const KdTree tree(targets);
    const double eps2 = epsilon * epsilon;
    std::size_t repeatable = 0;
    for (const auto& p : source_keypoints)
        if (tree.nearest(targets, T.apply(p)).squared_distance < eps2) ++repeatable;
    return repeatable;
}

inline std::vector<Eigen::Vector3d> keypoint_positions(const ColoredPointCloud& cloud, const KeypointSet& keypoints) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(keypoints.size());
    for (std::uint32_t i : keypoints.indices) out.push_back(cloud.points[i].position());
    return out;
}

namespace detail {

template <typename F>
double timed_seconds(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Q = noise(T * P); K_P = detector(P); K_Q = detector(Q); fraction of K_P
/// found again in K_Q within epsilon, averaged over the trials.
inline RepeatabilityReport evaluate_repeatability(const ColoredPointCloud& cloud, const DetectorConfig& detector,
                                                  const RepeatabilityConfig& config) {
    config.validate();
    RepeatabilityReport report;
    Engine transform_engine(config.transform_seed);

    double time_total = 0.0;
    std::size_t time_calls = 0;
    std::optional<KeypointSet> cached_source;

    for (std::size_t t = 0; t < config.trials; ++t) {
        const RigidTransform T =
            config.fixed_transform ? *config.fixed_transform : random_rigid_transform(transform_engine, config.max_translation);
        const ColoredPointCloud moved =
            add_gaussian_noise(apply_rigid_transform(cloud, T), config.sigma, config.noise_seed + t);

        KeypointSet source;
        if (detector.deterministic() && cached_source) {
            source = *cached_source;
        } else {
            time_total += detail::timed_seconds([&] { source = run_detector(detector, cloud, 2 * t); });
            ++time_calls;
            if (detector.deterministic()) cached_source = source;
        }
        KeypointSet target;
        time_total += detail::timed_seconds([&] { target = run_detector(detector, moved, 2 * t + 1); });
        ++time_calls;

        TrialResult trial;
        trial.keypoints_source = source.size();
        trial.keypoints_moved = target.size();
        const auto p = keypoint_positions(cloud, source);
        const auto q = keypoint_positions(moved, target);
        trial.repeatable = count_repeatable(p, T, q, config.epsilon);
        if (trial.keypoints_source == 0) report.empty_keypoints = true;
        else trial.repeatability = static_cast<double>(trial.repeatable) / static_cast<double>(trial.keypoints_source);

        report.total_keypoints += trial.keypoints_source;
        report.repeatable_keypoints += trial.repeatable;
        report.trials.push_back(trial);
    }
    double sum = 0.0;
    for (const auto& trial : report.trials) sum += trial.repeatability;
    report.relative_repeatability = sum / static_cast<double>(report.trials.size());
    report.detect_time_seconds = time_calls ? time_total / static_cast<double>(time_calls) : 0.0;
    return report;
}

struct RuntimeStats {
    std::vector<double> samples;
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
};

/// Wall-clock of detector(cloud) per repetition, always on a single worker.
/// Includes building the spatial index.
inline RuntimeStats measure_runtime(const ColoredPointCloud& cloud, const DetectorConfig& detector,
                                    std::size_t repetitions) {
    if (repetitions < 3) throw Error(ErrorCode::InvalidConfig, "at least three repetitions are required");
    DetectorConfig single = detector;
    single.threads = 1;
    RuntimeStats stats;
    for (std::size_t k = 0; k < repetitions; ++k) {
        KeypointSet result;
        stats.samples.push_back(detail::timed_seconds([&] { result = run_detector(single, cloud, k); }));
    }
    std::vector<double> sorted = stats.samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    stats.min = sorted.front();
    stats.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    stats.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    return stats;
}

struct AblationRow {
    double t_g = 0.0;
    double t_c = 0.0;
    std::size_t keypoint_count = 0;
    double repeatability = 0.0;
    double runtime_seconds = 0.0;
};

/// One row per (t_g, t_c) pair, t_g-major; every other parameter is taken
/// from `fixed`. Sweeping one list with a single value in the other yields
/// one row per swept value.
inline std::vector<AblationRow> ablation_sweep(const ColoredPointCloud& cloud, std::span<const double> t_g_values,
                                               std::span<const double> t_c_values, const DetectorParams& fixed,
                                               const RepeatabilityConfig& config, unsigned threads = 1) {
    if (t_g_values.empty() || t_c_values.empty())
        throw Error(ErrorCode::InvalidParams, "threshold lists must be non-empty");
    std::vector<AblationRow> rows;
    for (double t_g : t_g_values) {
        for (double t_c : t_c_values) {
            DetectorParams params = fixed;
            params.t_g = t_g;
            params.t_c = t_c;
            params.validate();
            DetectorConfig detector = DetectorConfig::ced(params);
            detector.threads = threads;
            const RepeatabilityReport report = evaluate_repeatability(cloud, detector, config);
            AblationRow row;
            row.t_g = t_g;
            row.t_c = t_c;
            row.keypoint_count = report.trials.front().keypoints_source;
            row.repeatability = report.relative_repeatability;
            row.runtime_seconds = report.detect_time_seconds;
            rows.push_back(row);
        }
    }
    return rows;
}

/// Random-baseline keypoint count matched to what CED finds on `cloud`.
inline std::size_t matched_random_count(const ColoredPointCloud& cloud, const DetectorParams& params,
                                        unsigned threads = 1) {
    return std::max<std::size_t>(1, detect(cloud, params, threads).size());
}

}  // namespace ced
