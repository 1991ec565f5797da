#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace funcount {

/// All random streams are std::mt19937_64 engines (bit-exact across standard
/// libraries) seeded through SplitMix64, so a per-subject stream depends only
/// on (seed, stream id, index) and never on scheduling.
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent seed for sub-stream `stream`, element `index`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Fisher-Yates shuffle. std::shuffle's algorithm is unspecified, so it is
/// avoided wherever a result must be identical across standard libraries.
template <class T>
void shuffle(std::vector<T>& items, Engine& engine) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(engine() % i);
        std::swap(items[i - 1], items[j]);
    }
}

// Stream identifiers used across modules.
namespace streams {
inline constexpr std::uint64_t kScores = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kCounts = 3;
inline constexpr std::uint64_t kMortality = 4;
inline constexpr std::uint64_t kSplit = 5;
inline constexpr std::uint64_t kForest = 6;
inline constexpr std::uint64_t kBoost = 7;
inline constexpr std::uint64_t kNarfdInit = 8;
inline constexpr std::uint64_t kNarfdFolds = 9;
inline constexpr std::uint64_t kCovariates = 10;
}  // namespace streams

}  // namespace funcount
