#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace wsn {

using Rng = std::mt19937_64;

/// Independent sub-stream seeds derived from one root seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

double uniform01(Rng& rng);

/// Uniform integer in [0, n). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Sub-stream identifiers used by the engine.
inline constexpr std::uint64_t kDeploymentStream = 0;
inline constexpr std::uint64_t kSourceStream = 1;
inline constexpr std::uint64_t kExplorationStream = 2;
inline constexpr std::uint64_t kClusterStream = 3;

}  // namespace wsn
