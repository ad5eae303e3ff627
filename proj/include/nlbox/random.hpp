#pragma once

// Seeded generators for random states, unitaries and channels. Used by the
// property suites, the acceptance runner and the sampled protocol modes.

#include <cstdint>
#include <random>

#include "nlbox/core.hpp"

namespace nlbox {

using Rng = std::mt19937_64;

/// Independent stream for item `index` of a run seeded with `seed`. Streams
/// depend only on (seed, index), so parallel and serial loops agree bit for bit.
Rng stream_rng(std::uint64_t seed, std::uint64_t index);

/// Haar-random unit vector.
KetVector random_ket(std::size_t dim, Rng& rng);

/// Random density operator of the given rank (Ginibre / induced measure).
DensityOperator random_density(std::size_t dim, std::size_t rank, Rng& rng);
inline DensityOperator random_density(std::size_t dim, Rng& rng) {
    return random_density(dim, dim, rng);
}

/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
Unitary random_unitary(std::size_t dim, Rng& rng);

/// Random CPTP map built from a random unitary on input (x) environment
/// followed by a partial trace; `env_dim` Kraus operators.
Channel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t env_dim, Rng& rng);

}  // namespace nlbox
