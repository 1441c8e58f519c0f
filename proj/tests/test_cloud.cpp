#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "ced/cloud.hpp"
#include "ced/error.hpp"
#include "oracles.hpp"

using namespace ced;

TEST(RemoveInvalid, KeepsExactlyFinitePointsInOrder) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    ColoredPointCloud cloud;
    cloud.resolution = 0.02;
    cloud.points = {{0, 0, 0, 0.1, 0.2, 0.3}, {nan, 0, 0, 0, 0, 0}, {1, 2, 3, 0, 0, 0},
                    {1, 1, 1, inf, 0, 0},      {4, 5, 6, 1, 1, 1}};
    const ColoredPointCloud out = remove_invalid(cloud);
    ASSERT_EQ(out.size(), 3U);
    EXPECT_EQ(out.points[0], cloud.points[0]);
    EXPECT_EQ(out.points[1], cloud.points[2]);
    EXPECT_EQ(out.points[2], cloud.points[4]);
    EXPECT_EQ(out.resolution, 0.02);
}

TEST(VoxelDownsample, MatchesBinningOracle) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ColoredPointCloud cloud = oracle::random_cloud(3000, 0.5, seed);
        const double leaf = 0.03 + 0.01 * static_cast<double>(seed);
        const ColoredPointCloud out = voxel_downsample(cloud, leaf);
        const auto expected = oracle::brute_voxel_means(cloud, leaf);
        ASSERT_EQ(out.size(), expected.size());
        for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(out.points[k], expected[k]) << k;
        EXPECT_EQ(out.resolution, leaf);
    }
}

TEST(VoxelDownsample, OneOutputPerOccupiedVoxel) {
    const ColoredPointCloud cloud = oracle::random_cloud(2000, 1.0, 9);
    const ColoredPointCloud out = voxel_downsample(cloud, 0.1);
    std::set<VoxelKey> occupied;
    for (const auto& p : cloud.points) occupied.insert(voxel_key(p, 0.1));
    EXPECT_EQ(out.size(), occupied.size());
}

TEST(VoxelDownsample, RejectsNonPositiveLeaf) {
    const ColoredPointCloud cloud = oracle::random_cloud(10, 1.0, 1);
    for (double leaf : {0.0, -0.1, std::numeric_limits<double>::quiet_NaN()}) {
        try {
            voxel_downsample(cloud, leaf);
            FAIL() << "no error for leaf " << leaf;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonPositiveLeaf);
        }
    }
}

TEST(RigidTransform, PreservesPairwiseDistancesAndColors) {
    Engine engine(5);
    const ColoredPointCloud cloud = oracle::random_cloud(60, 1.0, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const RigidTransform T = random_rigid_transform(engine);
        ASSERT_TRUE(T.is_valid());
        const ColoredPointCloud moved = apply_rigid_transform(cloud, T);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            EXPECT_EQ(moved.points[i].color(), cloud.points[i].color());
            for (std::size_t j = i + 1; j < cloud.size(); ++j) {
                const double before = (cloud.points[i].position() - cloud.points[j].position()).norm();
                const double after = (moved.points[i].position() - moved.points[j].position()).norm();
                EXPECT_NEAR(before, after, 1e-12);
            }
        }
    }
}

TEST(RigidTransform, InverseUndoesTransform) {
    Engine engine(17);
    const RigidTransform T = random_rigid_transform(engine, 2.0);
    const Eigen::Vector3d p(0.3, -1.2, 4.0);
    EXPECT_LT((T.inverse().apply(T.apply(p)) - p).norm(), 1e-12);
    for (int axis = 0; axis < 3; ++axis) EXPECT_LE(std::abs(T.translation[axis]), 2.0);
}

TEST(RigidTransform, RejectsImproperRotation) {
    RigidTransform reflection;
    reflection.rotation(0, 0) = -1.0;
    RigidTransform scaled;
    scaled.rotation *= 1.001;
    const ColoredPointCloud cloud = oracle::random_cloud(5, 1.0, 1);
    for (const auto& T : {reflection, scaled}) {
        try {
            apply_rigid_transform(cloud, T);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidTransform);
        }
    }
}

TEST(RigidTransform, RotationsAreUniformlyOriented) {
    // The mean of R e_z over uniform rotations is the zero vector.
    Engine engine(23);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    const int n = 20000;
    for (int k = 0; k < n; ++k) sum += random_rigid_transform(engine).rotation.col(2);
    EXPECT_LT((sum / n).norm(), 0.03);
}

TEST(GaussianNoise, StandardDeviationWithinTwoPercent) {
    ColoredPointCloud cloud;
    cloud.points.resize(100000);
    const double sigma = 0.005;
    const ColoredPointCloud noisy = add_gaussian_noise(cloud, sigma, 99);
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& p : noisy.points)
        for (double v : {p.gx, p.gy, p.gz}) {
            sum += v;
            sq += v * v;
        }
    const double n = 3.0 * static_cast<double>(noisy.size());
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    EXPECT_NEAR(sd, sigma, 0.02 * sigma);
    EXPECT_NEAR(mean, 0.0, 4.0 * sigma / std::sqrt(n));
}

TEST(GaussianNoise, ColorsUntouchedAndSeedDeterministic) {
    const ColoredPointCloud cloud = oracle::random_cloud(200, 1.0, 4);
    const ColoredPointCloud a = add_gaussian_noise(cloud, 0.01, 5);
    const ColoredPointCloud b = add_gaussian_noise(cloud, 0.01, 5);
    const ColoredPointCloud c = add_gaussian_noise(cloud, 0.01, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_EQ(a.points[i].color(), cloud.points[i].color());
}

TEST(GaussianNoise, ZeroSigmaIsIdentityAndNegativeRejected) {
    const ColoredPointCloud cloud = oracle::random_cloud(50, 1.0, 4);
    EXPECT_EQ(add_gaussian_noise(cloud, 0.0, 1), cloud);
    try {
        add_gaussian_noise(cloud, -1e-3, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NegativeSigma);
    }
}
