#pragma once

// Data-parallel Monte Carlo kernels. Each has an OpenMP version and a serial
// reference; items draw from independent (seed, index) streams and results are
// reduced in index order, so both produce bit-identical output.

#include <cstdint>
#include <vector>

#include "nlbox/protocols.hpp"
#include "nlbox/witness.hpp"

namespace nlbox {

/// Number of threads the parallel kernels will use.
int kernel_threads();

struct Bb84Context {
    const NonlinearBox* box = nullptr;
    BrunBoxConfig bases = BrunBoxConfig::bb84();
    SpacetimeEvent sender;
    SimulationMode mode = SimulationMode::kExact;
    EveStrategy eve = EveStrategy::kIdentified;
};

/// One interception round. The *_correct / bob_error fields are probabilities
/// in exact mode and 0/1 indicators in sampled mode.
struct Bb84Round {
    std::uint8_t alice_basis = 0;
    std::uint8_t alice_bit = 0;
    std::uint8_t bob_basis = 0;
    double eve_basis_correct = 0.0;
    double eve_bit_correct = 0.0;
    double bob_error = 0.0;

    friend bool operator==(const Bb84Round&, const Bb84Round&) = default;
};

Bb84Round simulate_bb84_round(const Bb84Context& ctx, std::uint64_t seed, std::uint64_t round);

std::vector<Bb84Round> bb84_rounds_serial(const Bb84Context& ctx, std::uint64_t n, std::uint64_t seed);
std::vector<Bb84Round> bb84_rounds_parallel(const Bb84Context& ctx, std::uint64_t n, std::uint64_t seed);

/// Replace every row of an exact table by multinomial frequencies of `shots`
/// draws.
StatsTable sample_table_serial(const StatsTable& exact, std::uint64_t shots, std::uint64_t seed);
StatsTable sample_table_parallel(const StatsTable& exact, std::uint64_t shots, std::uint64_t seed);

/// How many of `trials` sampled versions of a linear table (seeds
/// base_seed, base_seed + 1, ...) the default-tolerance linearity test rejects.
std::size_t linearity_rejections_serial(const StatsTable& exact, std::uint64_t shots,
                                        std::size_t trials, std::uint64_t base_seed);
std::size_t linearity_rejections_parallel(const StatsTable& exact, std::uint64_t shots,
                                          std::size_t trials, std::uint64_t base_seed);

}  // namespace nlbox
