#pragma once

// Executable protocols: verification of the Brun map, the remote-preparation
// signaling test, the preparation-class split and the BB84 interception.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlbox/boxes.hpp"
#include "nlbox/preparations.hpp"

namespace nlbox {

/// Where the classical records of the protocols live.
struct Layout {
    /// Alice's measurement record in the signaling and split protocols.
    SpacetimeEvent alice{0.0, 10.0};
    /// Record of local preparations fed to the box; defaults to one time unit
    /// before the box at the same place.
    std::optional<SpacetimeEvent> local;

    SpacetimeEvent local_event(const SpacetimeEvent& box_event) const {
        return local.value_or(SpacetimeEvent{box_event.t - 1.0, box_event.x});
    }
};

/// Bases that define the four verifying states for `box`: the box's own Brun
/// configuration (or the one a Kent box emulates), otherwise the BB84 pair.
BrunBoxConfig reference_bases(const NonlinearBox& box);

/// The four LocalDeterministic preparations psi0, psi1, phi0, phi1.
std::vector<Preparation> verifying_preparations(const BrunBoxConfig& bases,
                                                const SpacetimeEvent& record);

/// psi_mix = {1/2 psi0, 1/2 psi1} and phi_mix = {1/2 phi0, 1/2 phi1}: two
/// LocalEnsemble preparations of the same density I/2.
std::pair<Preparation, Preparation> matched_mixtures(const BrunBoxConfig& bases,
                                                     const SpacetimeEvent& record);

/// Rows of the linearity witness for a Brun-type box: the four verifying
/// states, a mixed y-direction state that completes the input span, and the two
/// matched mixtures.
std::vector<Preparation> witness_preparations(const BrunBoxConfig& bases, const SpacetimeEvent& record);

/// Measurement of the first output qubit in the computational basis.
Povm first_qubit_measurement(std::size_t output_dim);

// --- verification ---------------------------------------------------------------------

struct VerificationReport {
    std::vector<std::string> inputs;
    /// Per input: probabilities of the two-bit outcomes 00, 01, 10, 11.
    std::vector<std::array<double, 4>> probabilities;
    /// Per input: probability of its expected transition.
    std::vector<double> transition_probabilities;
    double tol = 0.0;
    bool identified = false;

    friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

VerificationReport run_verification(const NonlinearBox& box, double tol, const Layout& layout = {});

// --- signaling ------------------------------------------------------------------------

struct AliceSetting {
    std::string name;
    std::array<KetVector, 2> basis;
};

/// "psi" / "phi" resolved against the box's reference bases.
AliceSetting named_setting(const NonlinearBox& box, const std::string& name);

/// For Brun-type boxes every setting must be one of the box's own bases.
void validate_settings(const NonlinearBox& box, const std::vector<AliceSetting>& settings);

struct SettingResult {
    std::string name;
    std::vector<double> alice_probabilities;
    /// Bob's distribution over the first output qubit.
    std::array<double, 2> bob_distribution{};

    friend bool operator==(const SettingResult&, const SettingResult&) = default;
};

struct SignalingReport {
    std::vector<SettingResult> settings;
    double signaling_metric = 0.0;
    std::string policy;
    std::string semantics;

    friend bool operator==(const SignalingReport&, const SignalingReport&) = default;
};

SignalingReport run_signaling_test(const NonlinearBox& box, const std::vector<AliceSetting>& settings,
                                   const Layout& layout = {});

// --- preparation split ------------------------------------------------------------------

struct SplitEntry {
    std::string state;
    std::string verifying_label;
    std::string remote_label;
    bool linearly_equivalent = false;
    bool verifying_member = false;
    bool remote_member = false;
    double output_distance = 0.0;

    friend bool operator==(const SplitEntry&, const SplitEntry&) = default;
};

struct ClassSplitReport {
    std::vector<SplitEntry> entries;
    std::string policy;
    /// Every pair is linearly equivalent, verifying preparations are members,
    /// remote ones are not, and box outputs differ.
    bool split = false;
    /// Some remote preparation is admitted: the box would signal.
    bool hazard = false;

    friend bool operator==(const ClassSplitReport&, const ClassSplitReport&) = default;
};

/// Local preparation of x in the box's past light cone and the remote one
/// heralded by Alice measuring half a singlet; labels "remote_<x>".
std::vector<std::pair<Preparation, Preparation>> split_pairs(const NonlinearBox& box,
                                                             const Layout& layout = {});

ClassSplitReport run_preparation_problem_demo(const NonlinearBox& box, const Layout& layout = {});

// --- BB84 -------------------------------------------------------------------------------

enum class SimulationMode { kExact, kSampled };
enum class EveStrategy {
    kIdentified,  // re-prepare the state the box identified
    kFixedBasis,  // re-prepare the identified bit in the psi basis
};

std::string_view to_string(SimulationMode m);
SimulationMode simulation_mode_from_string(std::string_view name);
std::string_view to_string(EveStrategy s);
EveStrategy eve_strategy_from_string(std::string_view name);

struct Bb84Options {
    std::uint64_t n_bits = 0;
    std::uint64_t seed = 0;
    SimulationMode mode = SimulationMode::kExact;
    EveStrategy eve = EveStrategy::kIdentified;
    /// Use the OpenMP kernel; results are identical either way.
    bool parallel = true;
};

struct AttackReport {
    std::uint64_t n_bits = 0;
    std::uint64_t sifted_bits = 0;
    double eve_bit_accuracy = 0.0;
    double eve_basis_accuracy = 0.0;
    double induced_qber = 0.0;
    double sifted_key_fraction = 0.0;

    friend bool operator==(const AttackReport&, const AttackReport&) = default;
};

AttackReport run_bb84_attack(const NonlinearBox& box, const Bb84Options& options,
                             const Layout& layout = {});
inline AttackReport run_bb84_attack(const NonlinearBox& box, std::uint64_t n_bits, std::uint64_t seed) {
    return run_bb84_attack(box, Bb84Options{n_bits, seed});
}

}  // namespace nlbox
