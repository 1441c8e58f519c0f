#include <gtest/gtest.h>

#include "ced/evaluation.hpp"
#include "ced/report.hpp"
#include "ced/scene.hpp"
#include "oracles.hpp"

using namespace ced;

namespace {

ColoredPointCloud small_checker() {
    SceneSpec spec = SceneSpec::defaults(SceneKind::CheckerFloor);
    spec.extent = 0.4;
    spec.tile = 0.1;
    spec.jitter = 0.3;
    return generate_scene(spec);
}

}  // namespace

TEST(Repeatability, CountMatchesExhaustiveOracle) {
    Engine engine(2);
    for (int trial = 0; trial < 20; ++trial) {
        const ColoredPointCloud a = oracle::random_cloud(80, 1.0, 100 + trial);
        const ColoredPointCloud b = oracle::random_cloud(90, 1.0, 200 + trial);
        std::vector<Eigen::Vector3d> source;
        std::vector<Eigen::Vector3d> moved;
        for (const auto& p : a.points) source.push_back(p.position());
        const RigidTransform T = random_rigid_transform(engine, 0.05);
        for (const auto& p : b.points) moved.push_back(p.position());
        for (double eps : {0.02, 0.08, 0.2})
            EXPECT_EQ(count_repeatable(source, T, moved, eps), oracle::brute_repeatable(source, T, moved, eps));
    }
}

TEST(Repeatability, IdentityWithoutNoiseIsOne) {
    const ColoredPointCloud cloud = small_checker();
    RepeatabilityConfig config = RepeatabilityConfig::for_resolution(cloud.resolution);
    config.sigma = 0.0;
    config.trials = 3;
    config.fixed_transform = RigidTransform::identity();
    const auto report = evaluate_repeatability(cloud, DetectorConfig::ced(DetectorParams::for_resolution(0.01)), config);
    EXPECT_EQ(report.relative_repeatability, 1.0);
    EXPECT_EQ(report.repeatable_keypoints, report.total_keypoints);
}

TEST(Repeatability, EmptyKeypointSetsAreFlagged) {
    const ColoredPointCloud cloud = generate_scene(SceneSpec::defaults(SceneKind::Plane));
    auto params = DetectorParams::for_resolution(cloud.resolution);
    params.mode = DetectorMode::Ced3D;
    params.t_g = 1.0;
    RepeatabilityConfig config;
    config.trials = 2;
    const auto report = evaluate_repeatability(cloud, DetectorConfig::ced(params), config);
    EXPECT_TRUE(report.empty_keypoints);
    EXPECT_EQ(report.relative_repeatability, 0.0);
}

TEST(Repeatability, SeededRunsAreReproducible) {
    const ColoredPointCloud cloud = small_checker();
    RepeatabilityConfig config;
    config.trials = 3;
    const auto detector = DetectorConfig::random(20, 4);
    const auto a = evaluate_repeatability(cloud, detector, config);
    const auto b = evaluate_repeatability(cloud, detector, config);
    EXPECT_EQ(repeatability_csv(a, config, "random", false), repeatability_csv(b, config, "random", false));
}

TEST(Repeatability, RandomBaselineDrawsFreshSamplesPerCloud) {
    const ColoredPointCloud cloud = small_checker();
    DetectorConfig detector = DetectorConfig::random(30, 9);
    EXPECT_NE(run_detector(detector, cloud, 0).indices, run_detector(detector, cloud, 1).indices);
    detector.reseed_per_cloud = false;
    EXPECT_EQ(run_detector(detector, cloud, 0).indices, run_detector(detector, cloud, 1).indices);
}

TEST(Repeatability, InvalidConfigurations) {
    const ColoredPointCloud cloud = small_checker();
    RepeatabilityConfig config;
    config.sigma = -1.0;
    EXPECT_THROW(evaluate_repeatability(cloud, DetectorConfig::random(5, 1), config), Error);
    config = RepeatabilityConfig{};
    config.trials = 0;
    EXPECT_THROW(evaluate_repeatability(cloud, DetectorConfig::random(5, 1), config), Error);
    config = RepeatabilityConfig{};
    RigidTransform bad;
    bad.rotation(1, 1) = 2.0;
    config.fixed_transform = bad;
    EXPECT_THROW(evaluate_repeatability(cloud, DetectorConfig::random(5, 1), config), Error);
}

TEST(Runtime, RepetitionsAndStatistics) {
    const ColoredPointCloud cloud = small_checker();
    const auto detector = DetectorConfig::ced(DetectorParams::for_resolution(cloud.resolution));
    EXPECT_THROW(measure_runtime(cloud, detector, 2), Error);
    const auto stats = measure_runtime(cloud, detector, 4);
    ASSERT_EQ(stats.samples.size(), 4U);
    EXPECT_LE(stats.min, stats.median);
    EXPECT_LE(stats.min, stats.mean);
    EXPECT_GT(stats.min, 0.0);
}

TEST(Ablation, RowsFollowCartesianOrder) {
    const ColoredPointCloud cloud = small_checker();
    RepeatabilityConfig config = RepeatabilityConfig::for_resolution(cloud.resolution);
    config.trials = 1;
    const std::vector<double> tg{0.1, 0.3};
    const std::vector<double> tc{0.1, 0.4, 0.9};
    const auto rows = ablation_sweep(cloud, tg, tc, DetectorParams::for_resolution(cloud.resolution), config);
    ASSERT_EQ(rows.size(), 6U);
    EXPECT_EQ(rows[0].t_g, 0.1);
    EXPECT_EQ(rows[2].t_c, 0.9);
    EXPECT_EQ(rows[3].t_g, 0.3);
    for (std::size_t k = 1; k < 3; ++k) EXPECT_LE(rows[k].keypoint_count, rows[k - 1].keypoint_count);
    EXPECT_THROW(ablation_sweep(cloud, {}, tc, DetectorParams{}, config), Error);
}

TEST(Report, CsvShapes) {
    const ColoredPointCloud cloud = small_checker();
    const auto detection = detect_with_saliency(cloud, DetectorParams::for_resolution(cloud.resolution));
    const std::string csv = keypoints_csv(cloud, detection.keypoints, &detection.saliency);
    EXPECT_EQ(csv.rfind("index,x,y,z,r,g,b,d_g,d_c\n", 0), 0U);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(detection.keypoints.size() + 1));
    EXPECT_EQ(csv.find('\r'), std::string::npos);

    RepeatabilityConfig config;
    config.trials = 2;
    const auto report = evaluate_repeatability(cloud, DetectorConfig::random(10, 1), config);
    const std::string timed = repeatability_csv(report, config, "random", true);
    const std::string plain = repeatability_csv(report, config, "random", false);
    EXPECT_NE(timed.find("detect_time_seconds"), std::string::npos);
    EXPECT_EQ(plain.find("detect_time_seconds"), std::string::npos);
    EXPECT_EQ(std::count(plain.begin(), plain.end(), '\n'), 4);
}
