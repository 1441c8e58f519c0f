#pragma once

// Deterministic synthetic scenes used by tests, benchmarks and the CLI.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "ced/cloud.hpp"
#include "ced/error.hpp"
#include "ced/random.hpp"

namespace ced {

enum class SceneKind { Plane, BoxCorner, CheckerFloor, RoomComposite };

using Rgb8 = std::array<std::uint8_t, 3>;

struct SceneSpec {
    SceneKind kind = SceneKind::Plane;
    /// Side length of the scene (the box edge for room_composite).
    double extent = 1.0;
    /// Grid pitch; becomes the cloud resolution.
    double pitch = 0.01;
    /// Checker tile edge (checker_floor and the room floor).
    double tile = 0.2;
    /// In-plane jitter of every grid sample, as a fraction of the pitch.
    double jitter = 0.0;
    Rgb8 primary{128, 128, 128};
    Rgb8 secondary{230, 40, 40};
    std::uint64_t seed = 1;

    /// Per-kind defaults. The room is jittered so that no pair of points sits
    /// at a distance that is an exact multiple of the pitch, which keeps
    /// radius neighborhoods stable under rigid motion.
    static SceneSpec defaults(SceneKind kind) {
        SceneSpec spec;
        spec.kind = kind;
        switch (kind) {
            case SceneKind::Plane: break;
            case SceneKind::CheckerFloor:
                spec.primary = {240, 240, 240};
                spec.secondary = {20, 20, 20};
                break;
            case SceneKind::BoxCorner: spec.extent = 0.3; break;
            case SceneKind::RoomComposite:
                spec.extent = 0.58;
                spec.tile = 0.29;
                spec.jitter = 0.3;
                spec.primary = {235, 230, 220};
                spec.secondary = {60, 70, 160};
                break;
        }
        return spec;
    }

    void validate() const {
        if (!(pitch > 0.0) || !std::isfinite(pitch)) throw Error(ErrorCode::InvalidSpec, "pitch must be > 0");
        if (!(extent >= pitch) || !std::isfinite(extent))
            throw Error(ErrorCode::InvalidSpec, "extent must be at least one pitch");
        if (extent / pitch > 20000.0) throw Error(ErrorCode::InvalidSpec, "extent / pitch exceeds 20000");
        if (!(tile > 0.0)) throw Error(ErrorCode::InvalidSpec, "tile must be > 0");
        if (!(jitter >= 0.0 && jitter < 0.5)) throw Error(ErrorCode::InvalidSpec, "jitter must lie in [0, 0.5)");
    }
};

inline std::string_view to_string(SceneKind kind) {
    switch (kind) {
        case SceneKind::Plane: return "plane";
        case SceneKind::BoxCorner: return "box_corner";
        case SceneKind::CheckerFloor: return "checker_floor";
        case SceneKind::RoomComposite: return "room_composite";
    }
    return "unknown";
}

inline std::optional<SceneKind> scene_kind_from_string(std::string_view name) {
    if (name == "plane") return SceneKind::Plane;
    if (name == "box_corner" || name == "box-corner") return SceneKind::BoxCorner;
    if (name == "checker_floor" || name == "checker-floor") return SceneKind::CheckerFloor;
    if (name == "room_composite" || name == "room-composite" || name == "room") return SceneKind::RoomComposite;
    return std::nullopt;
}

namespace detail {

inline ColoredPoint make_point(double x, double y, double z, const Rgb8& c) {
    return {x, y, z, c[0] / 255.0, c[1] / 255.0, c[2] / 255.0};
}

inline std::int64_t grid_steps(double extent, double pitch) { return std::llround(extent / pitch); }

/// Tile parity of a coordinate pair; boundaries at exact multiples of `tile`.
inline bool checker_parity(double u, double v, double tile) {
    const auto iu = static_cast<std::int64_t>(std::floor(u / tile));
    const auto iv = static_cast<std::int64_t>(std::floor(v / tile));
    return ((iu + iv) % 2 + 2) % 2 == 1;
}

class Jitter {
public:
    Jitter(double amplitude, std::uint64_t seed) : amplitude_(amplitude), engine_(seed) {}

    double operator()(double coordinate, double lo, double hi) {
        if (amplitude_ == 0.0) return coordinate;
        return std::clamp(coordinate + uniform(engine_, -amplitude_, amplitude_), lo, hi);
    }

private:
    double amplitude_;
    Engine engine_;
};

/// Square grid centered on the origin in the z = 0 plane.
inline ColoredPointCloud centered_grid(const SceneSpec& spec, bool checker) {
    const std::int64_t n = grid_steps(spec.extent, spec.pitch);
    const double half = static_cast<double>(n) / 2.0;
    const double bound = half * spec.pitch;
    Jitter jitter(spec.jitter * spec.pitch, spec.seed);
    ColoredPointCloud cloud;
    cloud.resolution = spec.pitch;
    cloud.points.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (std::int64_t j = 0; j <= n; ++j) {
        for (std::int64_t i = 0; i <= n; ++i) {
            const double x = jitter((static_cast<double>(i) - half) * spec.pitch, -bound, bound);
            const double y = jitter((static_cast<double>(j) - half) * spec.pitch, -bound, bound);
            const Rgb8& color = checker && checker_parity(x, y, spec.tile) ? spec.secondary : spec.primary;
            cloud.points.push_back(make_point(x, y, 0.0, color));
        }
    }
    return cloud;
}

/// Three orthogonal faces through the origin. Each face is the positive
/// quadrant of its plane clipped by a disk centered at (c, c) with radius 2c,
/// so the faces reach `extent` along the shared edges and their outer rims
/// meet those edges at 120 degrees, which keeps every rim point less salient
/// than the apex.
inline ColoredPointCloud box_corner(const SceneSpec& spec) {
    const double c = spec.extent / (1.0 + std::sqrt(3.0));
    const std::int64_t n = static_cast<std::int64_t>(std::ceil(3.0 * c / spec.pitch));
    Jitter jitter(spec.jitter * spec.pitch, spec.seed);
    const auto inside = [&](double u, double v) {
        return (u - c) * (u - c) + (v - c) * (v - c) <= 4.0 * c * c;
    };
    ColoredPointCloud cloud;
    cloud.resolution = spec.pitch;
    const double hi = 3.0 * c;
    // Floor face z = 0 owns both edges through the origin in its plane; the
    // wall y = 0 owns the z axis; the wall x = 0 owns nothing shared.
    for (std::int64_t j = 0; j <= n; ++j)
        for (std::int64_t i = 0; i <= n; ++i) {
            const double u = i == 0 ? 0.0 : jitter(static_cast<double>(i) * spec.pitch, 0.0, hi);
            const double v = j == 0 ? 0.0 : jitter(static_cast<double>(j) * spec.pitch, 0.0, hi);
            if (inside(u, v)) cloud.points.push_back(make_point(u, v, 0.0, spec.primary));
        }
    for (std::int64_t k = 1; k <= n; ++k)
        for (std::int64_t i = 0; i <= n; ++i) {
            const double u = i == 0 ? 0.0 : jitter(static_cast<double>(i) * spec.pitch, 0.0, hi);
            const double v = jitter(static_cast<double>(k) * spec.pitch, spec.pitch * 0.5, hi);
            if (inside(u, v)) cloud.points.push_back(make_point(u, 0.0, v, spec.primary));
        }
    for (std::int64_t k = 1; k <= n; ++k)
        for (std::int64_t j = 1; j <= n; ++j) {
            const double u = jitter(static_cast<double>(j) * spec.pitch, spec.pitch * 0.5, hi);
            const double v = jitter(static_cast<double>(k) * spec.pitch, spec.pitch * 0.5, hi);
            if (inside(u, v)) cloud.points.push_back(make_point(0.0, u, v, spec.primary));
        }
    return cloud;
}

/// Closed box [0, extent]^3 seen from inside: checkered floor, plain ceiling
/// and four walls, every surface a distinct color. Its eight corners are box
/// corners and its floor is a checker floor.
inline ColoredPointCloud room(const SceneSpec& spec) {
    const std::int64_t n = grid_steps(spec.extent, spec.pitch);
    const double e = static_cast<double>(n) * spec.pitch;
    const double p = spec.pitch;
    Jitter jitter(spec.jitter * spec.pitch, spec.seed);
    static constexpr std::array<Rgb8, 5> kPalette{{
        {200, 60, 50},    // ceiling
        {70, 150, 80},    // wall y = 0
        {220, 190, 60},   // wall y = e
        {90, 110, 200},   // wall x = 0
        {160, 80, 170},   // wall x = e
    }};
    ColoredPointCloud cloud;
    cloud.resolution = spec.pitch;
    const auto coord = [&](std::int64_t i, double lo, double hi) {
        return jitter(static_cast<double>(i) * p, lo, hi);
    };
    // Border rows keep their border coordinate so edges stay on the edge.
    const auto edge_or_jitter = [&](std::int64_t i) {
        if (i == 0) return 0.0;
        if (i == n) return e;
        return coord(i, 0.5 * p, e - 0.5 * p);
    };

    for (std::int64_t j = 0; j <= n; ++j)
        for (std::int64_t i = 0; i <= n; ++i) {
            const double x = edge_or_jitter(i);
            const double y = edge_or_jitter(j);
            const Rgb8& color = checker_parity(x, y, spec.tile) ? spec.secondary : spec.primary;
            cloud.points.push_back(make_point(x, y, 0.0, color));
        }
    for (std::int64_t j = 0; j <= n; ++j)
        for (std::int64_t i = 0; i <= n; ++i)
            cloud.points.push_back(make_point(edge_or_jitter(i), edge_or_jitter(j), e, kPalette[0]));
    for (const double y : {0.0, e})
        for (std::int64_t k = 1; k < n; ++k)
            for (std::int64_t i = 0; i <= n; ++i)
                cloud.points.push_back(
                    make_point(edge_or_jitter(i), y, edge_or_jitter(k), kPalette[y == 0.0 ? 1 : 2]));
    for (const double x : {0.0, e})
        for (std::int64_t k = 1; k < n; ++k)
            for (std::int64_t j = 1; j < n; ++j)
                cloud.points.push_back(
                    make_point(x, edge_or_jitter(j), edge_or_jitter(k), kPalette[x == 0.0 ? 3 : 4]));
    return cloud;
}

}  // namespace detail

inline ColoredPointCloud generate_scene(const SceneSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case SceneKind::Plane: return detail::centered_grid(spec, false);
        case SceneKind::CheckerFloor: return detail::centered_grid(spec, true);
        case SceneKind::BoxCorner: return detail::box_corner(spec);
        case SceneKind::RoomComposite: return detail::room(spec);
    }
    throw Error(ErrorCode::InvalidSpec, "unknown scene kind");
}

}  // namespace ced
