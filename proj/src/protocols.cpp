#include "nlbox/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "nlbox/errors.hpp"
#include "nlbox/kernels.hpp"
#include "nlbox/steering.hpp"

namespace nlbox {

namespace {

constexpr std::array<const char*, 4> kStateNames{"psi0", "psi1", "phi0", "phi1"};

const KetVector& reference_state(const BrunBoxConfig& bases, std::size_t index) {
    return bases.basis(static_cast<int>(index / 2))[index % 2];
}

bool same_basis(const std::array<KetVector, 2>& a, const std::array<KetVector, 2>& b) {
    const auto matches = [&b](const KetVector& k) {
        for (const auto& other : b) {
            if (std::norm(k.inner(other)) >= 1.0 - tol::kValid) return true;
        }
        return false;
    };
    return matches(a[0]) && matches(a[1]);
}

SteeringAssemblage singlet_measured_in(const std::array<KetVector, 2>& basis) {
    return make_assemblage(DensityOperator::pure(kets::singlet()), Povm::projective(basis), 2);
}

}  // namespace

BrunBoxConfig reference_bases(const NonlinearBox& box) {
    if (const auto* brun = box.brun()) return *brun;
    if (const auto* kent = std::get_if<KentBoxConfig>(&box.kind()); kent && kent->brun()) {
        return *kent->brun();
    }
    return BrunBoxConfig::bb84();
}

std::vector<Preparation> verifying_preparations(const BrunBoxConfig& bases, const SpacetimeEvent& record) {
    std::vector<Preparation> preps;
    for (std::size_t i = 0; i < kStateNames.size(); ++i) {
        preps.push_back(Preparation::pure(kStateNames[i], reference_state(bases, i),
                                          Provenance(ProvenanceTag::kLocalDeterministic, {record})));
    }
    return preps;
}

std::pair<Preparation, Preparation> matched_mixtures(const BrunBoxConfig& bases,
                                                     const SpacetimeEvent& record) {
    const auto mixture = [&record](const std::string& label, const std::array<KetVector, 2>& basis) {
        return Preparation(label,
                           {{0.5, DensityOperator::pure(basis[0])}, {0.5, DensityOperator::pure(basis[1])}},
                           Provenance(ProvenanceTag::kLocalEnsemble, {record}));
    };
    return {mixture("psi_mix", bases.psi()), mixture("phi_mix", bases.phi())};
}

std::vector<Preparation> witness_preparations(const BrunBoxConfig& bases, const SpacetimeEvent& record) {
    auto preps = verifying_preparations(bases, record);
    Matrix y(2, 2);
    y << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    const Matrix rho = 0.5 * (Matrix::Identity(2, 2) + 0.5 * y);
    preps.emplace_back("y_mixed", std::vector<EnsembleMember>{{1.0, DensityOperator(rho)}},
                       Provenance(ProvenanceTag::kLocalDeterministic, {record}));
    auto [psi_mix, phi_mix] = matched_mixtures(bases, record);
    preps.push_back(std::move(psi_mix));
    preps.push_back(std::move(phi_mix));
    return preps;
}

Povm first_qubit_measurement(std::size_t output_dim) {
    if (output_dim == 2) return Povm::computational(2);
    if (output_dim % 2 != 0) {
        throw ShapeError("first_qubit_measurement: output dim " + std::to_string(output_dim) +
                         " has no leading qubit");
    }
    const auto rest = static_cast<Eigen::Index>(output_dim / 2);
    const Matrix id = Matrix::Identity(rest, rest);
    return Povm({kron(DensityOperator::pure(kets::zero()).matrix(), id),
                 kron(DensityOperator::pure(kets::one()).matrix(), id)});
}

// --- verification -------------------------------------------------------------------

VerificationReport run_verification(const NonlinearBox& box, double tol, const Layout& layout) {
    const BrunBoxConfig bases = reference_bases(box);
    const auto preps = verifying_preparations(bases, layout.local_event(box.event()));
    VerificationReport report;
    report.tol = tol;
    report.identified = box.output_dim() == 4;
    for (std::size_t i = 0; i < preps.size(); ++i) {
        report.inputs.push_back(preps[i].label());
        std::array<double, 4> probs{};
        if (box.output_dim() == 4) {
            const auto p = born_probabilities(apply_box(box, preps[i]), Povm::computational(4));
            std::copy(p.begin(), p.end(), probs.begin());
        }
        report.probabilities.push_back(probs);
        report.transition_probabilities.push_back(probs[i]);
        report.identified = report.identified && probs[i] >= 1.0 - tol;
    }
    return report;
}

// --- signaling --------------------------------------------------------------------------

AliceSetting named_setting(const NonlinearBox& box, const std::string& name) {
    const BrunBoxConfig bases = reference_bases(box);
    if (name == "psi") return {name, bases.psi()};
    if (name == "phi") return {name, bases.phi()};
    throw ValidationError("unknown Alice setting '" + name + "' (expected psi or phi)");
}

void validate_settings(const NonlinearBox& box, const std::vector<AliceSetting>& settings) {
    if (settings.empty()) throw ValidationError("signaling: at least one Alice setting is required");
    const bool brun_type = box.brun() != nullptr ||
                           (std::holds_alternative<KentBoxConfig>(box.kind()) &&
                            std::get<KentBoxConfig>(box.kind()).brun().has_value());
    if (!brun_type) return;
    const BrunBoxConfig bases = reference_bases(box);
    for (const auto& s : settings) {
        if (!same_basis(s.basis, bases.psi()) && !same_basis(s.basis, bases.phi())) {
            throw ValidationError("signaling: setting '" + s.name +
                                  "' is neither the box's psi basis nor its phi basis");
        }
    }
}

SignalingReport run_signaling_test(const NonlinearBox& box, const std::vector<AliceSetting>& settings,
                                   const Layout& layout) {
    if (box.input_dim() != 2) throw ShapeError("signaling: box must take a qubit input");
    validate_settings(box, settings);
    const Povm bob_measurement = first_qubit_measurement(box.output_dim());

    SignalingReport report;
    report.policy = std::string(to_string(box.membership().kind()));
    report.semantics = std::string(to_string(box.semantics()));
    for (const auto& setting : settings) {
        const auto assemblage = singlet_measured_in(setting.basis);
        SettingResult result;
        result.name = setting.name;
        for (const auto& h : assemblage.heralded) result.alice_probabilities.push_back(h.weight);
        for (const auto& remote : remote_preparations(assemblage, layout.alice, "remote_" + setting.name + "_")) {
            const auto q = born_probabilities(apply_box(box, remote.preparation), bob_measurement);
            result.bob_distribution[0] += remote.probability * q[0];
            result.bob_distribution[1] += remote.probability * q[1];
        }
        report.settings.push_back(std::move(result));
    }
    for (std::size_t a = 0; a < report.settings.size(); ++a) {
        for (std::size_t b = a + 1; b < report.settings.size(); ++b) {
            const auto& qa = report.settings[a].bob_distribution;
            const auto& qb = report.settings[b].bob_distribution;
            const double tv = 0.5 * (std::abs(qa[0] - qb[0]) + std::abs(qa[1] - qb[1]));
            report.signaling_metric = std::max(report.signaling_metric, tv);
        }
    }
    report.signaling_metric = std::clamp(report.signaling_metric, 0.0, 1.0);
    return report;
}

// --- preparation split ---------------------------------------------------------------------

std::vector<std::pair<Preparation, Preparation>> split_pairs(const NonlinearBox& box, const Layout& layout) {
    const BrunBoxConfig bases = reference_bases(box);
    const auto local = verifying_preparations(bases, layout.local_event(box.event()));
    std::vector<std::pair<Preparation, Preparation>> pairs;
    for (std::size_t i = 0; i < local.size(); ++i) {
        const KetVector& target = reference_state(bases, i);
        const auto assemblage = singlet_measured_in(bases.basis(static_cast<int>(i / 2)));
        const auto remotes = remote_preparations(assemblage, layout.alice, "");
        const auto it = std::find_if(remotes.begin(), remotes.end(), [&target](const RemotePreparation& r) {
            return fidelity(target, r.preparation.effective_density()) >= 1.0 - tol::kValid;
        });
        if (it == remotes.end()) {
            throw MisuseError("split_pairs: steering did not herald " + std::string(kStateNames[i]));
        }
        Preparation remote("remote_" + std::string(kStateNames[i]), it->preparation.ensemble(),
                           it->preparation.provenance());
        pairs.emplace_back(local[i], std::move(remote));
    }
    return pairs;
}

ClassSplitReport run_preparation_problem_demo(const NonlinearBox& box, const Layout& layout) {
    ClassSplitReport report;
    report.policy = std::string(to_string(box.membership().kind()));
    report.split = true;
    for (const auto& [verifying, remote] : split_pairs(box, layout)) {
        SplitEntry e;
        e.state = verifying.label();
        e.verifying_label = verifying.label();
        e.remote_label = remote.label();
        e.linearly_equivalent = linearly_equivalent(verifying, remote);
        e.verifying_member = classify_membership(verifying, box.membership());
        e.remote_member = classify_membership(remote, box.membership());
        e.output_distance = trace_distance(apply_box(box, verifying), apply_box(box, remote));
        report.hazard = report.hazard || e.remote_member;
        report.split = report.split && e.linearly_equivalent && e.verifying_member && !e.remote_member &&
                       e.output_distance > tol::kValid;
        report.entries.push_back(std::move(e));
    }
    report.split = report.split && !report.hazard;
    return report;
}

// --- BB84 -----------------------------------------------------------------------------------------

std::string_view to_string(SimulationMode m) { return m == SimulationMode::kExact ? "exact" : "sampled"; }

SimulationMode simulation_mode_from_string(std::string_view name) {
    if (name == "exact") return SimulationMode::kExact;
    if (name == "sampled") return SimulationMode::kSampled;
    throw ValidationError("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(EveStrategy s) {
    return s == EveStrategy::kIdentified ? "identified" : "fixed_basis";
}

EveStrategy eve_strategy_from_string(std::string_view name) {
    if (name == "identified") return EveStrategy::kIdentified;
    if (name == "fixed_basis") return EveStrategy::kFixedBasis;
    throw ValidationError("unknown Eve strategy '" + std::string(name) + "'");
}

AttackReport run_bb84_attack(const NonlinearBox& box, const Bb84Options& options, const Layout& layout) {
    if (box.input_dim() != 2 || box.output_dim() != 4) {
        throw MisuseError("bb84: the interception box must map a qubit to two qubits");
    }
    AttackReport report;
    report.n_bits = options.n_bits;
    if (options.n_bits == 0) return report;

    Bb84Context ctx;
    ctx.box = &box;
    ctx.bases = reference_bases(box);
    ctx.sender = layout.local_event(box.event());
    ctx.mode = options.mode;
    ctx.eve = options.eve;
    const auto rounds = options.parallel ? bb84_rounds_parallel(ctx, options.n_bits, options.seed)
                                         : bb84_rounds_serial(ctx, options.n_bits, options.seed);

    double basis_ok = 0.0, bit_ok = 0.0, errors = 0.0;
    std::uint64_t sifted = 0;
    for (const auto& r : rounds) {
        basis_ok += r.eve_basis_correct;
        bit_ok += r.eve_bit_correct;
        if (r.bob_basis == r.alice_basis) {
            ++sifted;
            errors += r.bob_error;
        }
    }
    const auto n = static_cast<double>(options.n_bits);
    report.sifted_bits = sifted;
    report.eve_basis_accuracy = basis_ok / n;
    report.eve_bit_accuracy = bit_ok / n;
    report.induced_qber = sifted > 0 ? errors / static_cast<double>(sifted) : 0.0;
    report.sifted_key_fraction = static_cast<double>(sifted) / n;
    return report;
}

}  // namespace nlbox
