#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace cholgauss {

using Rng = std::mt19937_64;

// Fills `out` with independent standard normal draws.
inline void fill_normal(Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
    std::normal_distribution<double> dist;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = dist(rng);
}

// Derives an independent stream for replication / fold `index`.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace cholgauss
