#include "nlbox/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <random>

#include "nlbox/random.hpp"

namespace nlbox {

int kernel_threads() { return omp_get_max_threads(); }

Bb84Round simulate_bb84_round(const Bb84Context& ctx, std::uint64_t seed, std::uint64_t round) {
    Rng rng = stream_rng(seed, round);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Bb84Round r;
    r.alice_basis = coin(rng) ? 1 : 0;
    r.alice_bit = coin(rng) ? 1 : 0;
    r.bob_basis = coin(rng) ? 1 : 0;

    const auto& sent = ctx.bases.basis(r.alice_basis)[r.alice_bit];
    const Preparation honest = Preparation::pure(
        "alice", sent, Provenance(ProvenanceTag::kLocalDeterministic, {ctx.sender}));
    const auto eve_view = born_probabilities(apply_box(*ctx.box, honest), Povm::computational(4));

    const auto bob_error_given = [&](int basis, int bit) {
        const int prepared_basis = ctx.eve == EveStrategy::kFixedBasis ? 0 : basis;
        const auto& forwarded = ctx.bases.basis(prepared_basis)[static_cast<std::size_t>(bit)];
        const auto bob = born_probabilities(DensityOperator::pure(forwarded),
                                            Povm::projective(ctx.bases.basis(r.bob_basis)));
        return bob[1u - r.alice_bit];
    };

    if (ctx.mode == SimulationMode::kExact) {
        for (int o = 0; o < 4; ++o) {
            const double q = eve_view[static_cast<std::size_t>(o)];
            if (q == 0.0) continue;
            const int basis = o >> 1;
            const int bit = o & 1;
            r.eve_basis_correct += basis == r.alice_basis ? q : 0.0;
            r.eve_bit_correct += bit == r.alice_bit ? q : 0.0;
            r.bob_error += q * bob_error_given(basis, bit);
        }
        return r;
    }

    const double u = unit(rng);
    int o = 0;
    for (double acc = eve_view[0]; o < 3 && u >= acc;) acc += eve_view[static_cast<std::size_t>(++o)];
    const int basis = o >> 1;
    const int bit = o & 1;
    r.eve_basis_correct = basis == r.alice_basis ? 1.0 : 0.0;
    r.eve_bit_correct = bit == r.alice_bit ? 1.0 : 0.0;
    r.bob_error = unit(rng) < bob_error_given(basis, bit) ? 1.0 : 0.0;
    return r;
}

std::vector<Bb84Round> bb84_rounds_serial(const Bb84Context& ctx, std::uint64_t n, std::uint64_t seed) {
    std::vector<Bb84Round> rounds(n);
    for (std::uint64_t i = 0; i < n; ++i) rounds[i] = simulate_bb84_round(ctx, seed, i);
    return rounds;
}

std::vector<Bb84Round> bb84_rounds_parallel(const Bb84Context& ctx, std::uint64_t n, std::uint64_t seed) {
    std::vector<Bb84Round> rounds(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        rounds[static_cast<std::size_t>(i)] = simulate_bb84_round(ctx, seed, static_cast<std::uint64_t>(i));
    }
    return rounds;
}

namespace {

std::vector<std::uint64_t> multinomial(const std::vector<double>& p, std::uint64_t shots, Rng& rng) {
    std::vector<std::uint64_t> counts(p.size(), 0);
    std::uint64_t left = shots;
    double mass = 1.0;
    for (std::size_t k = 0; k + 1 < p.size() && left > 0; ++k) {
        const double q = mass > 0.0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> draw(left, q);
        counts[k] = draw(rng);
        left -= counts[k];
        mass -= p[k];
    }
    counts.back() += left;
    return counts;
}

struct SampledCell {
    std::vector<double> frequencies;
};

SampledCell sample_cell(const StatsTable& exact, std::size_t cell, std::uint64_t shots, std::uint64_t seed) {
    const std::size_t nm = exact.measurements().size();
    Rng rng = stream_rng(seed, cell);
    const auto counts = multinomial(exact.probabilities()[cell / nm][cell % nm], shots, rng);
    SampledCell out;
    out.frequencies.reserve(counts.size());
    for (auto c : counts) out.frequencies.push_back(static_cast<double>(c) / static_cast<double>(shots));
    return out;
}

StatsTable assemble(const StatsTable& exact, std::vector<SampledCell> cells, std::uint64_t shots) {
    const std::size_t np = exact.preparations().size();
    const std::size_t nm = exact.measurements().size();
    std::vector<std::vector<std::vector<double>>> probs(np, std::vector<std::vector<double>>(nm));
    std::vector<std::vector<std::uint64_t>> counts(np, std::vector<std::uint64_t>(nm, shots));
    for (std::size_t c = 0; c < cells.size(); ++c) probs[c / nm][c % nm] = std::move(cells[c].frequencies);
    return StatsTable(exact.preparations(), exact.measurements(), std::move(probs), std::move(counts));
}

}  // namespace

StatsTable sample_table_serial(const StatsTable& exact, std::uint64_t shots, std::uint64_t seed) {
    const std::size_t n = exact.preparations().size() * exact.measurements().size();
    std::vector<SampledCell> cells(n);
    for (std::size_t c = 0; c < n; ++c) cells[c] = sample_cell(exact, c, shots, seed);
    return assemble(exact, std::move(cells), shots);
}

StatsTable sample_table_parallel(const StatsTable& exact, std::uint64_t shots, std::uint64_t seed) {
    const auto n = static_cast<std::int64_t>(exact.preparations().size() * exact.measurements().size());
    std::vector<SampledCell> cells(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < n; ++c) {
        cells[static_cast<std::size_t>(c)] = sample_cell(exact, static_cast<std::size_t>(c), shots, seed);
    }
    return assemble(exact, std::move(cells), shots);
}

std::size_t linearity_rejections_serial(const StatsTable& exact, std::uint64_t shots,
                                        std::size_t trials, std::uint64_t base_seed) {
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        rejected += is_linear_explainable(sample_table_serial(exact, shots, base_seed + i)) ? 0 : 1;
    }
    return rejected;
}

std::size_t linearity_rejections_parallel(const StatsTable& exact, std::uint64_t shots,
                                          std::size_t trials, std::uint64_t base_seed) {
    std::size_t rejected = 0;
    const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic) reduction(+ : rejected)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto seed = base_seed + static_cast<std::uint64_t>(i);
        rejected += is_linear_explainable(sample_table_serial(exact, shots, seed)) ? 0 : 1;
    }
    return rejected;
}

}  // namespace nlbox
