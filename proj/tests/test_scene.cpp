#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "ced/scene.hpp"

using namespace ced;

TEST(Scene, PlaneGridIsCenteredAndFlat) {
    const ColoredPointCloud plane = generate_scene(SceneSpec::defaults(SceneKind::Plane));
    EXPECT_EQ(plane.size(), 101U * 101U);
    EXPECT_EQ(plane.resolution, 0.01);
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& p : plane.points) {
        EXPECT_EQ(p.gz, 0.0);
        sx += p.gx;
        sy += p.gy;
    }
    EXPECT_NEAR(sx, 0.0, 1e-9);
    EXPECT_NEAR(sy, 0.0, 1e-9);
}

TEST(Scene, CheckerFloorHasTwoColorsInEqualShare) {
    SceneSpec spec = SceneSpec::defaults(SceneKind::CheckerFloor);
    const ColoredPointCloud floor = generate_scene(spec);
    std::set<double> reds;
    std::size_t dark = 0;
    for (const auto& p : floor.points) {
        reds.insert(p.r);
        if (p.r < 0.5) ++dark;
    }
    EXPECT_EQ(reds.size(), 2U);
    EXPECT_NEAR(double(dark) / double(floor.size()), 0.5, 0.05);
}

TEST(Scene, BoxCornerHasThreeOrthogonalFacesAndApex) {
    const ColoredPointCloud box = generate_scene(SceneSpec::defaults(SceneKind::BoxCorner));
    // Edges through the apex have length `extent`; face rims bulge to 3c.
    const double c = 0.3 / (1.0 + std::sqrt(3.0));
    double longest_edge = 0.0;
    std::size_t apex = 0;
    for (const auto& p : box.points) {
        const int on_planes = int(p.gx == 0.0) + int(p.gy == 0.0) + int(p.gz == 0.0);
        EXPECT_GE(on_planes, 1);
        if (on_planes == 3) ++apex;
        EXPECT_LE(std::max({p.gx, p.gy, p.gz}), 3.0 * c + 1e-12);
        if (on_planes == 2) longest_edge = std::max({longest_edge, p.gx, p.gy, p.gz});
    }
    EXPECT_EQ(apex, 1U);
    EXPECT_NEAR(longest_edge, 0.3, 0.011);
    std::set<std::tuple<double, double, double>> unique;
    for (const auto& p : box.points) unique.insert({p.gx, p.gy, p.gz});
    EXPECT_EQ(unique.size(), box.size());
}

TEST(Scene, RoomIsClosedBoxOfAboutTwentyThousandPoints) {
    const SceneSpec spec = SceneSpec::defaults(SceneKind::RoomComposite);
    const ColoredPointCloud room = generate_scene(spec);
    EXPECT_GT(room.size(), 19000U);
    EXPECT_LT(room.size(), 21000U);
    for (const auto& p : room.points) {
        const bool on_face = p.gx == 0.0 || p.gy == 0.0 || p.gz == 0.0 || p.gx == spec.extent ||
                             p.gy == spec.extent || p.gz == spec.extent;
        EXPECT_TRUE(on_face);
    }
    std::set<std::tuple<double, double, double>> colors;
    for (const auto& p : room.points) colors.insert({p.r, p.g, p.b});
    EXPECT_EQ(colors.size(), 7U);
}

TEST(Scene, DeterministicPerSeed) {
    SceneSpec spec = SceneSpec::defaults(SceneKind::RoomComposite);
    EXPECT_EQ(generate_scene(spec), generate_scene(spec));
    SceneSpec other = spec;
    other.seed = 2;
    EXPECT_NE(generate_scene(spec), generate_scene(other));
}

TEST(Scene, NamesAndValidation) {
    for (auto kind : {SceneKind::Plane, SceneKind::BoxCorner, SceneKind::CheckerFloor, SceneKind::RoomComposite})
        EXPECT_EQ(scene_kind_from_string(to_string(kind)), kind);
    EXPECT_FALSE(scene_kind_from_string("cube"));
    SceneSpec bad;
    bad.pitch = 0.0;
    EXPECT_THROW(generate_scene(bad), Error);
    bad = SceneSpec{};
    bad.jitter = 0.7;
    EXPECT_THROW(generate_scene(bad), Error);
}
