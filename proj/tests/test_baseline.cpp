#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ced/baseline.hpp"
#include "oracles.hpp"

using namespace ced;

TEST(RandomBaseline, DistinctSortedInRange) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto idx = sample_indices(100, 1 + seed, seed);
        ASSERT_EQ(idx.size(), 1 + seed);
        EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
        EXPECT_EQ(std::set<std::uint32_t>(idx.begin(), idx.end()).size(), idx.size());
        EXPECT_LT(idx.back(), 100U);
    }
    EXPECT_EQ(sample_indices(7, 7, 3).size(), 7U);
}

TEST(RandomBaseline, SeedDeterminism) {
    EXPECT_EQ(sample_indices(1000, 30, 5), sample_indices(1000, 30, 5));
    EXPECT_NE(sample_indices(1000, 30, 5), sample_indices(1000, 30, 6));
}

TEST(RandomBaseline, InclusionFrequencyIsUniform) {
    // Every index is drawn with probability k / n; allow four standard errors.
    const std::size_t n = 50;
    const std::size_t k = 10;
    const int trials = 20000;
    std::vector<int> hits(n, 0);
    for (int t = 0; t < trials; ++t)
        for (std::uint32_t i : sample_indices(n, k, static_cast<std::uint64_t>(t))) ++hits[i];
    const double p = double(k) / double(n);
    const double se = std::sqrt(p * (1.0 - p) / trials);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(hits[i] / double(trials), p, 4.0 * se) << i;
}

TEST(RandomBaseline, CountOutOfRange) {
    const ColoredPointCloud cloud = oracle::random_cloud(10, 1.0, 1);
    for (std::size_t count : {0UL, 11UL}) {
        try {
            detect_random(cloud, count, 1);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::CountOutOfRange);
        }
    }
}
