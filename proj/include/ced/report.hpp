#pragma once

// CSV and point-cloud exports. All CSV output has a single header row and
// LF line endings; floating values use 9 significant digits.

#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ced/cloud.hpp"
#include "ced/detector.hpp"
#include "ced/evaluation.hpp"

namespace ced {

namespace detail {
inline std::string num(double v) { return fmt::format("{:.9g}", v); }
}  // namespace detail

/// index,x,y,z,r,g,b,d_g,d_c. Saliency columns are left empty when the
/// corresponding field is not available.
inline std::string keypoints_csv(const ColoredPointCloud& cloud, const KeypointSet& keypoints,
                                 const SaliencyFields* saliency = nullptr) {
    std::string out = "index,x,y,z,r,g,b,d_g,d_c\n";
    for (std::uint32_t i : keypoints.indices) {
        const ColoredPoint& p = cloud.points[i];
        out += fmt::format("{},{},{},{},{},{},{},", i, detail::num(p.gx), detail::num(p.gy), detail::num(p.gz),
                           detail::num(p.r), detail::num(p.g), detail::num(p.b));
        if (saliency && saliency->geometric.size() == cloud.size()) out += detail::num(saliency->geometric.values[i]);
        out += ',';
        if (saliency && saliency->photometric && saliency->photometric->size() == cloud.size())
            out += detail::num(saliency->photometric->values[i]);
        out += '\n';
    }
    return out;
}

/// The selected points as a cloud of their own (same resolution and color flag).
inline ColoredPointCloud keypoint_cloud(const ColoredPointCloud& cloud, const KeypointSet& keypoints) {
    ColoredPointCloud out;
    out.resolution = cloud.resolution;
    out.has_color = cloud.has_color;
    out.points.reserve(keypoints.size());
    for (std::uint32_t i : keypoints.indices) out.points.push_back(cloud.points[i]);
    return out;
}

inline std::string repeatability_csv(const RepeatabilityReport& report, const RepeatabilityConfig& config,
                                     std::string_view detector_name, bool with_timing) {
    std::string out = "trial,detector,epsilon,sigma,keypoints_source,keypoints_moved,repeatable,repeatability";
    out += with_timing ? ",detect_time_seconds\n" : "\n";
    const auto row_tail = [&](std::string& line) {
        if (with_timing) line += ',' + detail::num(report.detect_time_seconds);
        line += '\n';
    };
    for (std::size_t t = 0; t < report.trials.size(); ++t) {
        const TrialResult& trial = report.trials[t];
        std::string line = fmt::format("{},{},{},{},{},{},{},{}", t, detector_name, detail::num(config.epsilon),
                                       detail::num(config.sigma), trial.keypoints_source, trial.keypoints_moved,
                                       trial.repeatable, detail::num(trial.repeatability));
        row_tail(line);
        out += line;
    }
    std::string summary = fmt::format("mean,{},{},{},{},,{},{}", detector_name, detail::num(config.epsilon),
                                      detail::num(config.sigma), report.total_keypoints, report.repeatable_keypoints,
                                      detail::num(report.relative_repeatability));
    row_tail(summary);
    out += summary;
    return out;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows, const RepeatabilityConfig& config,
                                bool with_timing) {
    std::string out = "t_g,t_c,keypoint_count,repeatability,epsilon,sigma,trials";
    out += with_timing ? ",runtime_seconds\n" : "\n";
    for (const auto& row : rows) {
        out += fmt::format("{},{},{},{},{},{},{}", detail::num(row.t_g), detail::num(row.t_c), row.keypoint_count,
                           detail::num(row.repeatability), detail::num(config.epsilon), detail::num(config.sigma),
                           config.trials);
        if (with_timing) out += ',' + detail::num(row.runtime_seconds);
        out += '\n';
    }
    return out;
}

inline std::string runtime_csv(const RuntimeStats& stats, std::string_view detector_name, std::size_t points,
                               std::size_t keypoints) {
    std::string out = "detector,points,keypoints,repetition,seconds\n";
    for (std::size_t k = 0; k < stats.samples.size(); ++k)
        out += fmt::format("{},{},{},{},{}\n", detector_name, points, keypoints, k, detail::num(stats.samples[k]));
    out += fmt::format("{},{},{},mean,{}\n", detector_name, points, keypoints, detail::num(stats.mean));
    out += fmt::format("{},{},{},median,{}\n", detector_name, points, keypoints, detail::num(stats.median));
    out += fmt::format("{},{},{},min,{}\n", detector_name, points, keypoints, detail::num(stats.min));
    return out;
}

}  // namespace ced
