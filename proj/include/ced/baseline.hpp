#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "ced/cloud.hpp"
#include "ced/detector.hpp"
#include "ced/error.hpp"
#include "ced/random.hpp"

namespace ced {

/// Uniform sample of `count` distinct indices out of [0, n) by a partial
/// Fisher-Yates shuffle, returned in ascending order.
inline std::vector<std::uint32_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
    if (count < 1 || count > n)
        throw Error(ErrorCode::CountOutOfRange, fmt::format("count {} outside [1, {}]", count, n));
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0U);
    Engine engine(seed);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(uniform_below(engine, n - k));
        std::swap(pool[k], pool[pick]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Random keypoint selector.
inline KeypointSet detect_random(const ColoredPointCloud& cloud, std::size_t count, std::uint64_t seed) {
    KeypointSet out;
    out.indices = sample_indices(cloud.size(), count, seed);
    return out;
}

}  // namespace ced
