// Wall-clock comparison of the serial and OpenMP kernels.
//
//   bench_kernels [--rounds N] [--shots N] [--trials N] [--reps N]

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>

#include "nlbox/kernels.hpp"
#include "nlbox/random.hpp"

using namespace nlbox;

namespace {

double best_ms(int reps, const std::function<void()>& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto start = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
}

void row(const std::string& name, double serial, double parallel, bool same) {
    std::cout << std::left << std::setw(22) << name << std::right << std::fixed << std::setprecision(2)
              << std::setw(12) << serial << std::setw(12) << parallel << std::setw(9) << serial / parallel
              << (same ? "   identical" : "   MISMATCH") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs OpenMP kernel benchmark", "bench_kernels"};
    std::uint64_t rounds = 200000;
    std::uint64_t shots = 100000;
    std::size_t trials = 200;
    int reps = 3;
    app.add_option("--rounds", rounds, "BB84 rounds");
    app.add_option("--shots", shots, "Shots per table row");
    app.add_option("--trials", trials, "Linearity-test trials");
    app.add_option("--reps", reps, "Repetitions (best time is reported)")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    std::cout << "threads: " << kernel_threads() << '\n';
    std::cout << std::left << std::setw(22) << "kernel" << std::right << std::setw(12) << "serial ms" << std::setw(12)
              << "openmp ms" << std::setw(9) << "speedup" << '\n';

    const NonlinearBox box(BrunBoxConfig::bb84(), {1.0, 0.0}, Semantics::kDecomposition,
                           MembershipPolicy::deterministic_experimenter());
    Bb84Context ctx;
    ctx.box = &box;
    ctx.mode = SimulationMode::kSampled;
    ctx.eve = EveStrategy::kFixedBasis;
    std::vector<Bb84Round> a;
    std::vector<Bb84Round> b;
    const double s1 = best_ms(reps, [&] { a = bb84_rounds_serial(ctx, rounds, 1); });
    const double p1 = best_ms(reps, [&] { b = bb84_rounds_parallel(ctx, rounds, 1); });
    row("bb84_rounds", s1, p1, a == b);

    Rng rng = stream_rng(2, 0);
    const auto exact = tabulate_channel(random_channel(2, 4, 2, rng), pauli_eigenstates(), pauli_measurements(2));
    std::optional<StatsTable> ta;
    std::optional<StatsTable> tb;
    const double s2 = best_ms(reps, [&] { ta = sample_table_serial(exact, shots, 3); });
    const double p2 = best_ms(reps, [&] { tb = sample_table_parallel(exact, shots, 3); });
    row("sample_table", s2, p2, *ta == *tb);

    const auto identity = tabulate_channel(Channel::identity(2), pauli_eigenstates(), pauli_measurements(1));
    std::size_t ra = 0;
    std::size_t rb = 0;
    const double s3 = best_ms(reps, [&] { ra = linearity_rejections_serial(identity, 10000, trials, 4); });
    const double p3 = best_ms(reps, [&] { rb = linearity_rejections_parallel(identity, 10000, trials, 4); });
    row("linearity_rejections", s3, p3, ra == rb);
    return 0;
}
