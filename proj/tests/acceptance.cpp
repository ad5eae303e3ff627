// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nlbox/kernels.hpp"
#include "nlbox/protocols.hpp"
#include "nlbox/random.hpp"
#include "nlbox/report.hpp"
#include "nlbox/scenario.hpp"
#include "nlbox/steering.hpp"
#include "nlbox/witness.hpp"
#include "oracles.hpp"

using namespace nlbox;
namespace fs = std::filesystem;

namespace {

const SpacetimeEvent kBox{1.0, 0.0};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Criterion = std::function<void(Outcome&)>;

NonlinearBox brun(Semantics s, MembershipPolicy m) { return NonlinearBox(BrunBoxConfig::bb84(), kBox, s, std::move(m)); }

double elapsed_s(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

void ac1(Outcome& o) {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_verification(brun(Semantics::kDecomposition, MembershipPolicy::deterministic_experimenter()), 1e-12);
    const double secs = elapsed_s(start);
    double worst = 0.0;
    for (double p : r.transition_probabilities) worst = std::max(worst, std::abs(1.0 - p));
    o.detail << "max |1 - p| = " << worst << ", runtime " << secs << " s";
    o.require(r.transition_probabilities.size() == 4, "four transitions");
    o.require(worst <= 1e-12, "transition probabilities");
    o.require(r.identified, "identified");
    o.require(secs < 1.0, "runtime < 1 s");
}

void ac2(Outcome& o) {
    const auto box = brun(Semantics::kDecomposition, MembershipPolicy::naive_pure());
    const auto r = run_signaling_test(box, {named_setting(box, "psi"), named_setting(box, "phi")});
    o.detail << "signaling_metric = " << r.signaling_metric;
    o.require(std::abs(r.signaling_metric - 1.0) <= 1e-12, "metric = 1");
}

void ac3(Outcome& o) {
    Rng rng = stream_rng(3003, 0);
    const std::vector<BoxKind> kinds{BrunBoxConfig::bb84(), KentBoxConfig::emulating(BrunBoxConfig::bb84()),
                                     DeutschBoxConfig(named_two_qubit_unitary("cnot_swap"), 2)};
    const std::vector<MembershipPolicy> safe{MembershipPolicy::kent_light_cone(kBox),
                                             MembershipPolicy::deterministic_experimenter()};
    double worst_excluded = 0.0;
    for (const auto& kind : kinds) {
        for (const auto& policy : safe) {
            for (auto s : {Semantics::kDecomposition, Semantics::kState}) {
                const NonlinearBox box(kind, kBox, s, policy);
                const auto r = run_signaling_test(box, {named_setting(box, "psi"), named_setting(box, "phi")});
                worst_excluded = std::max(worst_excluded, r.signaling_metric);
            }
        }
    }
    const std::vector<MembershipPolicy> all{MembershipPolicy::naive_pure(), MembershipPolicy::kent_light_cone(kBox),
                                            MembershipPolicy::deterministic_experimenter(),
                                            MembershipPolicy::explicit_list({"remote_r0_0"})};
    double worst_linear = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto channel = random_channel(2, i % 2 == 0 ? 2 : 4, 1 + static_cast<std::size_t>(i % 3), rng);
        for (const auto& policy : all) {
            for (auto s : {Semantics::kDecomposition, Semantics::kState}) {
                const NonlinearBox box(LinearBoxConfig{channel}, kBox, s, policy);
                std::vector<AliceSetting> settings;
                for (int k = 0; k < 2; ++k) {
                    const auto u = random_unitary(2, rng);
                    settings.push_back({"r" + std::to_string(k), {KetVector(u.matrix().col(0)), KetVector(u.matrix().col(1))}});
                }
                worst_linear = std::max(worst_linear, run_signaling_test(box, settings).signaling_metric);
            }
        }
    }
    o.detail << "max metric under exclusion = " << worst_excluded << ", over 50 linear boxes = " << worst_linear;
    o.require(worst_excluded < 1e-9, "exclusion policies");
    o.require(worst_linear < 1e-9, "linear boxes");
}

void ac4(Outcome& o) {
    const auto r = run_preparation_problem_demo(brun(Semantics::kDecomposition, MembershipPolicy::kent_light_cone(kBox)));
    o.require(r.entries.size() == 4, "four states");
    const Matrix passthrough = oracle::kron(Matrix::Identity(2, 2) / 2.0, oracle::outer(oracle::ket0()));
    const std::array<std::array<int, 2>, 4> bits{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
    o.detail << "distances";
    for (std::size_t i = 0; i < r.entries.size() && i < 4; ++i) {
        const auto& e = r.entries[i];
        const double expected = oracle::trace_distance(oracle::outer(oracle::two_bit(bits[i][0], bits[i][1])), passthrough);
        o.detail << " " << e.state << "=" << e.output_distance;
        o.require(e.linearly_equivalent, e.state + " linearly equivalent");
        o.require(e.output_distance > 0.4, e.state + " distance > 0.4");
        o.require(std::abs(e.output_distance - expected) <= 1e-9, e.state + " matches oracle");
    }
    o.require(r.split && !r.hazard, "split without hazard");
}

void ac5(Outcome& o) {
    const auto pair = matched_mixtures(BrunBoxConfig::bb84(), {0.0, 0.0});
    const double dec = affinity_violation(brun(Semantics::kDecomposition, MembershipPolicy::naive_pure()), pair);
    const double state = affinity_violation(brun(Semantics::kState, MembershipPolicy::naive_pure()), pair);
    o.detail << "decomposition = " << dec << ", state = " << state;
    o.require(std::abs(dec - 1.0) <= 1e-12, "decomposition semantics = 1");
    o.require(std::abs(state) <= 1e-12, "state semantics = 0");
}

void ac6(Outcome& o) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = stream_rng(6006, 0);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::uniform_int_distribution<std::size_t> count(1, 4);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = trial % 2 == 0 ? 2 : 3;
        const std::size_t n = count(rng);
        std::uniform_int_distribution<std::size_t> rank(1, d);
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) total += (x = weight(rng));
        std::vector<EnsembleMember> members;
        for (std::size_t i = 0; i < n; ++i) members.push_back({w[i] / total, random_density(d, rank(rng), rng)});
        const auto dec = EnsembleDecomposition::of(members);
        const auto a = hjw_assemblage(dec);
        const auto id = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        Matrix avg = Matrix::Zero(id.rows(), id.cols());
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = steer(a, i);
            // Independent conditioning of the joint state.
            const Matrix lifted = oracle::kron(a.povm_a.effect(i), id) * a.state_ab.matrix();
            const double p = lifted.trace().real();
            const Matrix cond = oracle::trace_out(lifted, static_cast<int>(a.dim_a), static_cast<int>(d), true) / p;
            worst = std::max({worst, std::abs(s.probability - members[i].weight), std::abs(p - members[i].weight),
                              oracle::max_abs(s.state.matrix(), members[i].state.matrix()),
                              oracle::max_abs(cond, members[i].state.matrix())});
            avg += s.probability * s.state.matrix();
        }
        worst = std::max(worst, oracle::max_abs(avg, dec.sigma_b().matrix()));
    }
    const double secs = elapsed_s(start);
    o.detail << "max deviation = " << worst << " over 200 instances, runtime " << secs << " s";
    o.require(worst <= 1e-8, "round trip within 1e-8");
    o.require(secs < 30.0, "runtime < 30 s");
}

void ac7(Outcome& o) {
    Rng rng = stream_rng(7007, 0);
    const DeutschBoxConfig swap(named_two_qubit_unitary("swap"), 2);
    double swap_err = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto rho = random_density(2, rng);
        swap_err = std::max(swap_err, max_abs_diff(deutsch_fixed_point(swap, rho).matrix(), rho.matrix()));
    }
    const DeutschBoxConfig cnot(named_two_qubit_unitary("cnot"), 2);
    const double cnot_err =
        max_abs_diff(deutsch_fixed_point(cnot, DensityOperator::pure(kets::one())).matrix(), Matrix::Identity(2, 2) / 2.0);

    const NonlinearBox box(DeutschBoxConfig(named_two_qubit_unitary("cnot_swap"), 2), kBox, Semantics::kDecomposition,
                           MembershipPolicy::naive_pure());
    const Preparation z("z", {{0.5, DensityOperator::pure(kets::zero())}, {0.5, DensityOperator::pure(kets::one())}},
                        Provenance(ProvenanceTag::kLocalEnsemble, {{0.0, 0.0}}));
    const Preparation x("x", {{0.5, DensityOperator::pure(kets::plus())}, {0.5, DensityOperator::pure(kets::minus())}},
                        Provenance(ProvenanceTag::kLocalEnsemble, {{0.0, 0.0}}));
    const double gap = affinity_violation(box, {z, x});
    const auto& u = std::get<DeutschBoxConfig>(box.kind()).unitary().matrix();
    const auto brute = [&u](const KetVector& k) {
        const Matrix rho = DensityOperator::pure(k).matrix();
        return oracle::deutsch_output(u, rho, oracle::deutsch_cesaro(u, rho, 2, 20000), 2);
    };
    const double brute_gap = oracle::trace_distance(0.5 * (brute(kets::zero()) + brute(kets::one())),
                                                    0.5 * (brute(kets::plus()) + brute(kets::minus())));
    o.detail << "swap error = " << swap_err << ", cnot |1> error = " << cnot_err << ", affinity gap = " << gap
             << " (oracle " << brute_gap << ")";
    o.require(swap_err <= 1e-8, "SWAP fixed point");
    o.require(cnot_err <= 1e-8, "CNOT fixed point");
    o.require(gap > 1e-3, "affinity gap > 1e-3");
    o.require(std::abs(gap - brute_gap) < 1e-3, "gap agrees with brute-force oracle");
}

void ac8(Outcome& o) {
    Rng rng = stream_rng(8008, 0);
    double worst_linear = 0.0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t dout = i % 2 == 0 ? 2 : 4;
        const auto channel = random_channel(2, dout, 1 + static_cast<std::size_t>(i % 3), rng);
        std::vector<LabeledInput> inputs;
        for (int k = 0; k < 6; ++k) inputs.push_back({"p" + std::to_string(k), random_density(2, rng)});
        const auto t = tabulate_channel(channel, inputs, pauli_measurements(dout == 2 ? 1 : 2));
        worst_linear = std::max(worst_linear, fit_linear_map(t).residual);
    }
    const NonlinearBox box(BrunBoxConfig::bb84(), kBox, Semantics::kDecomposition, MembershipPolicy::naive_pure());
    const auto brun_table = tabulate_box(box, witness_preparations(*box.brun(), {0.0, 0.0}), pauli_measurements(2));
    const double brun_residual = fit_linear_map(brun_table).residual;
    const auto identity = tabulate_channel(Channel::identity(2), pauli_eigenstates(), pauli_measurements(1));
    const std::size_t rejected = linearity_rejections_parallel(identity, 10000, 100, 80080);
    o.detail << "max linear residual = " << worst_linear << ", Brun residual = " << brun_residual
             << ", false positives = " << rejected << "/100";
    o.require(worst_linear < 1e-9, "linear residual < 1e-9");
    o.require(brun_residual >= 0.49, "Brun residual >= 0.49");
    o.require(rejected <= 1, "false-positive rate <= 1%");
}

void ac9(Outcome& o) {
    const auto box = brun(Semantics::kDecomposition, MembershipPolicy::deterministic_experimenter());
    const auto exact = run_bb84_attack(box, Bb84Options{10000, 42, SimulationMode::kExact, EveStrategy::kIdentified});
    const auto ablation = run_bb84_attack(box, Bb84Options{10000, 7, SimulationMode::kSampled, EveStrategy::kFixedBasis});
    const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(std::max<std::uint64_t>(ablation.sifted_bits, 1)));
    o.detail << "exact: accuracy = " << exact.eve_bit_accuracy << ", qber = " << exact.induced_qber
             << "; ablation qber = " << ablation.induced_qber << " (sigma " << sigma << ", sifted "
             << ablation.sifted_bits << ")";
    o.require(exact.eve_bit_accuracy == 1.0, "bit accuracy = 1");
    o.require(exact.induced_qber == 0.0, "qber = 0");
    o.require(std::abs(ablation.induced_qber - 0.25) <= 3.0 * sigma, "ablation within 3 sigma");
}

void ac10(Outcome& o) {
    const fs::path dir = fs::path(oracle::source_dir()) / "scenarios";
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".scn") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::size_t identical = 0;
    for (const auto& f : files) {
        bool same = true;
        for (auto format : {OutputFormat::kJson, OutputFormat::kCsv}) {
            const auto first = render(run_scenario(parse_scenario(f)), format);
            const auto second = render(run_scenario(parse_scenario(f)), format);
            same = same && first == second;
        }
        o.require(same, f.filename().string());
        if (same) ++identical;
    }
    o.detail << identical << "/" << files.size() << " scenarios byte-identical";
    o.require(files.size() >= 10, "bundled scenarios found");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, Criterion>> criteria{
        {"AC1 Brun verification", ac1},        {"AC2 signaling reductio", ac2},
        {"AC3 no-signaling under exclusion", ac3}, {"AC4 preparation-class split", ac4},
        {"AC5 affinity witness", ac5},         {"AC6 steering round-trip", ac6},
        {"AC7 Deutsch fixed points", ac7},     {"AC8 linearity witness calibration", ac8},
        {"AC9 BB84 attack", ac9},              {"AC10 determinism", ac10},
    };
    std::cout << std::setprecision(6);
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        o.detail << std::setprecision(6);
        const auto start = std::chrono::steady_clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double ms = elapsed_s(start) * 1e3;
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << " (" << std::fixed
                  << std::setprecision(1) << ms << " ms)" << std::defaultfloat << std::setprecision(6) << '\n';
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
