#pragma once

// Nonlinear boxes: bounded regions where states are mapped nonlinearly, with
// ordinary linear quantum mechanics everywhere else. A box pairs a map (Brun,
// Deutsch CTC, Kent readout, or an ordinary linear channel for comparison)
// with a semantics policy and a membership policy.
//
// Dispatch rule of apply_box:
//   member of the verifying set:
//     state semantics          -> map(effective density)
//     decomposition semantics  -> sum_m w_m map(member_m)
//   non-member: the box acts linearly on the density visible at the box event
//     Brun    -> identity on the input qubit, ancilla left in |0>
//     Deutsch -> CTC map on the visible density
//     Kent    -> readout by light-cone rule, then the target map
//   linear channel boxes ignore membership and act on the effective density.

#include <array>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "nlbox/core.hpp"
#include "nlbox/preparations.hpp"

namespace nlbox {

enum class Semantics {
    kState,          // the box sees only the effective density
    kDecomposition,  // mixing distributes over the evolution of members
};

std::string_view to_string(Semantics s);
Semantics semantics_from_string(std::string_view name);

using PureStateMap = std::function<DensityOperator(const KetVector&)>;
using DensityMap = std::function<DensityOperator(const DensityOperator&)>;

/// |chi> -> |chi><chi| (x) |0><0| : the qubit passes through, ancilla untouched.
DensityOperator brun_identity_completion(const DensityOperator& rho);

// --- Brun map ------------------------------------------------------------------

enum class BrunCompletion { kStrict, kCustom };

/// Two non-identical orthonormal qubit bases. psi_b -> |0 b>, phi_b -> |1 b>.
class BrunBoxConfig {
public:
    BrunBoxConfig(std::array<KetVector, 2> psi, std::array<KetVector, 2> phi);
    BrunBoxConfig(std::array<KetVector, 2> psi, std::array<KetVector, 2> phi,
                  PureStateMap custom_completion, std::string completion_name);

    /// psi = computational, phi = {|+>, |->}.
    static BrunBoxConfig bb84();

    const std::array<KetVector, 2>& psi() const noexcept { return psi_; }
    const std::array<KetVector, 2>& phi() const noexcept { return phi_; }
    BrunCompletion completion() const noexcept {
        return custom_ ? BrunCompletion::kCustom : BrunCompletion::kStrict;
    }
    const std::string& completion_name() const noexcept { return completion_name_; }
    const PureStateMap& custom_completion() const noexcept { return custom_; }

    /// The box's own basis (0 = psi, 1 = phi).
    const std::array<KetVector, 2>& basis(int which) const { return which == 0 ? psi_ : phi_; }

private:
    std::array<KetVector, 2> psi_;
    std::array<KetVector, 2> phi_;
    PureStateMap custom_;
    std::string completion_name_ = "strict";
};

/// Two-qubit output for a one-qubit pure input; the |0> ancilla is implicit.
DensityOperator brun_apply_pure(const BrunBoxConfig& config, const KetVector& input);

/// Density-level map: pure inputs go through brun_apply_pure on their
/// principal eigenvector; mixed inputs get the identity completion.
DensityOperator brun_apply(const BrunBoxConfig& config, const DensityOperator& input);

// --- Deutsch CTC -----------------------------------------------------------------

struct FixedPointOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
};

/// Interaction unitary on system (x) CTC, system factor first.
class DeutschBoxConfig {
public:
    DeutschBoxConfig(Unitary unitary, std::size_t ctc_dim, FixedPointOptions fixed_point = {});

    const Unitary& unitary() const noexcept { return unitary_; }
    std::size_t ctc_dim() const noexcept { return ctc_dim_; }
    std::size_t system_dim() const noexcept { return unitary_.dim() / ctc_dim_; }
    const FixedPointOptions& fixed_point() const noexcept { return fixed_point_; }

private:
    Unitary unitary_;
    std::size_t ctc_dim_;
    FixedPointOptions fixed_point_;
};

/// Tr_sys[U (rho_in (x) sigma) U^dag], linear in sigma (also for non-states).
Matrix deutsch_ctc_map(const DeutschBoxConfig& config, const DensityOperator& rho_in,
                       const Matrix& sigma);

/// Canonical consistent CTC state: the limit of Cesaro means of the CTC map's
/// iterates started from the maximally mixed state.
DensityOperator deutsch_fixed_point(const DeutschBoxConfig& config, const DensityOperator& rho_in);

/// Tr_ctc[U (rho_in (x) rho*) U^dag]
DensityOperator deutsch_apply(const DeutschBoxConfig& config, const DensityOperator& rho_in);

/// Named interaction unitaries on two qubits (system first):
/// identity, swap, cnot (system controls CTC), cnot_swap (swap, then CTC
/// controls system).
Unitary named_two_qubit_unitary(std::string_view name);

// --- Kent readout --------------------------------------------------------------------

/// Readout-then-re-prepare emulation of a nonlinear map.
class KentBoxConfig {
public:
    KentBoxConfig(DensityMap target, std::size_t input_dim, std::size_t output_dim,
                  std::string target_name);

    /// Re-prepare through the Brun map computed from the readout.
    static KentBoxConfig emulating(const BrunBoxConfig& brun);

    const DensityMap& target() const noexcept { return target_; }
    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t output_dim() const noexcept { return output_dim_; }
    const std::string& target_name() const noexcept { return target_name_; }
    /// Set when built by `emulating`.
    const std::optional<BrunBoxConfig>& brun() const noexcept { return brun_; }

private:
    DensityMap target_;
    std::size_t input_dim_;
    std::size_t output_dim_;
    std::string target_name_;
    std::optional<BrunBoxConfig> brun_;
};

/// Distribution of classical readouts plus the untouched input. If every record
/// is in the past light cone of the box, each ensemble member is read out with
/// its weight; otherwise the single readout is the unheralded density.
struct KentReadout {
    std::vector<EnsembleMember> readouts;
    Preparation passthrough;

    /// The readout when it is unique; MisuseError otherwise.
    const DensityOperator& readout() const;
};

KentReadout kent_readout(const Preparation& p, const SpacetimeEvent& box_event);

// --- linear reference box ------------------------------------------------------------

struct LinearBoxConfig {
    Channel channel;
};

// --- NonlinearBox --------------------------------------------------------------------

using BoxKind = std::variant<BrunBoxConfig, DeutschBoxConfig, KentBoxConfig, LinearBoxConfig>;

std::string_view box_kind_name(const BoxKind& kind);

class NonlinearBox {
public:
    NonlinearBox(BoxKind kind, SpacetimeEvent event, Semantics semantics,
                 MembershipPolicy membership);

    const BoxKind& kind() const noexcept { return kind_; }
    const SpacetimeEvent& event() const noexcept { return event_; }
    Semantics semantics() const noexcept { return semantics_; }
    const MembershipPolicy& membership() const noexcept { return membership_; }

    std::size_t input_dim() const;
    std::size_t output_dim() const;

    bool is_linear() const noexcept { return std::holds_alternative<LinearBoxConfig>(kind_); }
    const BrunBoxConfig* brun() const noexcept { return std::get_if<BrunBoxConfig>(&kind_); }

    NonlinearBox with_semantics(Semantics s) const;
    NonlinearBox with_membership(MembershipPolicy m) const;

    /// Action on a member state.
    DensityOperator map(const DensityOperator& rho) const;

private:
    BoxKind kind_;
    SpacetimeEvent event_;
    Semantics semantics_;
    MembershipPolicy membership_;
};

DensityOperator apply_box(const NonlinearBox& box, const Preparation& p);

}  // namespace nlbox
