#pragma once

// Remote preparation by steering: any finite decomposition of a receiver's
// state can be prepared by a measurement on the other half of a purification.

#include <cstddef>
#include <vector>

#include "nlbox/core.hpp"
#include "nlbox/preparations.hpp"

namespace nlbox {

inline constexpr std::size_t kMaxDecompositionMembers = 16;

/// sigma_B = sum_i p_i rho_i with positive weights.
class EnsembleDecomposition {
public:
    EnsembleDecomposition(DensityOperator sigma_b, std::vector<EnsembleMember> members);

    /// Decomposition of the members' own average.
    static EnsembleDecomposition of(std::vector<EnsembleMember> members);

    const DensityOperator& sigma_b() const noexcept { return sigma_b_; }
    const std::vector<EnsembleMember>& members() const noexcept { return members_; }

private:
    DensityOperator sigma_b_;
    std::vector<EnsembleMember> members_;
};

/// Bipartite state on A (x) B, a measurement on A, and the outcome
/// probabilities with conditional B states it induces.
struct SteeringAssemblage {
    DensityOperator state_ab;
    Povm povm_a;
    std::size_t dim_a;
    std::size_t dim_b;
    std::vector<EnsembleMember> heralded;
};

/// Builds the assemblage for an arbitrary bipartite state and POVM on A.
/// Outcomes with zero probability are kept with weight 0 and the maximally
/// mixed state as placeholder.
SteeringAssemblage make_assemblage(DensityOperator state_ab, Povm povm_a, std::size_t dim_b);

/// Canonical purification |Psi> = sum_k sqrt(l_k) |k>_A |e_k>_B over the
/// support of sigma_B, eigenvalues descending; dim A = rank(sigma_B).
KetVector purify(const DensityOperator& sigma_b);

/// Measurement on the canonical purification that heralds member i with
/// probability p_i. Mixed members are split into their eigen-ensembles and the
/// corresponding rank-one effects coarse-grained into one outcome.
SteeringAssemblage hjw_assemblage(const EnsembleDecomposition& d);

struct SteeredState {
    double probability;
    DensityOperator state;
};

/// Outcome probability and B's conditional state.
SteeredState steer(const SteeringAssemblage& assemblage, std::size_t outcome);

struct RemotePreparation {
    std::size_t outcome;
    double probability;
    Preparation preparation;
};

/// One RemoteSteered preparation per outcome with nonzero probability, labeled
/// `label_prefix` + outcome index; each records `alice_event` and carries B's
/// unconditional marginal as its unheralded density.
std::vector<RemotePreparation> remote_preparations(const SteeringAssemblage& assemblage,
                                             const SpacetimeEvent& alice_event,
                                             const std::string& label_prefix);

}  // namespace nlbox
