#pragma once

// Preparation procedures as operational objects: an ensemble decomposition,
// a provenance tag, and the spacetime events where classical information about
// the realized member exists. Linear equivalence compares effective densities;
// membership policies decide which preparations exhibit a box's nonlinear
// evolution.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nlbox/core.hpp"

namespace nlbox {

/// Point in 1+1 Minkowski space with c = 1.
struct SpacetimeEvent {
    double t = 0.0;
    double x = 0.0;

    SpacetimeEvent() = default;
    SpacetimeEvent(double t_, double x_);

    SpacetimeEvent translated(double dt, double dx) const { return {t + dt, x + dx}; }
    friend bool operator==(const SpacetimeEvent&, const SpacetimeEvent&) = default;
};

/// True iff `e` lies in (or on) the past light cone of `box`.
bool in_past_light_cone(const SpacetimeEvent& e, const SpacetimeEvent& box);

enum class ProvenanceTag {
    kLocalDeterministic,  // e.g. a NOT gate applied to |0>
    kLocalEnsemble,       // e.g. post-selection from a measured ensemble
    kRemoteSteered,       // heralded by a distant measurement on an entangled partner
};

std::string_view to_string(ProvenanceTag tag);
ProvenanceTag provenance_tag_from_string(std::string_view name);

class Provenance {
public:
    /// `unheralded` is the receiver's state for someone without access to the
    /// records (for a steered preparation, the marginal of the entangled
    /// source). Defaults to the preparation's own effective density.
    Provenance(ProvenanceTag tag, std::vector<SpacetimeEvent> records,
               std::optional<DensityOperator> unheralded = std::nullopt);

    ProvenanceTag tag() const noexcept { return tag_; }
    const std::vector<SpacetimeEvent>& records() const noexcept { return records_; }
    const std::optional<DensityOperator>& unheralded() const noexcept { return unheralded_; }

    Provenance translated(double dt, double dx) const;

private:
    ProvenanceTag tag_;
    std::vector<SpacetimeEvent> records_;
    std::optional<DensityOperator> unheralded_;
};

struct EnsembleMember {
    double weight;
    DensityOperator state;
};

class Preparation {
public:
    Preparation(std::string label, std::vector<EnsembleMember> ensemble, Provenance provenance);

    /// Single pure member with the given provenance.
    static Preparation pure(std::string label, const KetVector& ket, Provenance provenance);

    const std::string& label() const noexcept { return label_; }
    std::size_t dim() const noexcept { return ensemble_.front().state.dim(); }
    const std::vector<EnsembleMember>& ensemble() const noexcept { return ensemble_; }
    const Provenance& provenance() const noexcept { return provenance_; }

    /// Weighted sum of the ensemble members.
    const DensityOperator& effective_density() const noexcept { return effective_; }

    Preparation translated(double dt, double dx) const;

private:
    std::string label_;
    std::vector<EnsembleMember> ensemble_;
    Provenance provenance_;
    DensityOperator effective_;
};

inline const DensityOperator& effective_density(const Preparation& p) {
    return p.effective_density();
}

/// Equal effective densities (trace distance <= 1e-8), i.e. identical
/// statistics under every linear transformation and measurement.
bool linearly_equivalent(const Preparation& a, const Preparation& b);

/// Density knowable at `box_event`: the effective density if every record is
/// in the box's past light cone, otherwise the unheralded density.
const DensityOperator& visible_density(const Preparation& p, const SpacetimeEvent& box_event);

enum class MembershipKind {
    kNaivePure,                  // every pure-state preparation verifies
    kKentLightCone,              // records must lie in the box's past light cone
    kDeterministicExperimenter,  // only deterministic single-state local preparations
    kExplicitList,               // named labels
};

std::string_view to_string(MembershipKind kind);
MembershipKind membership_kind_from_string(std::string_view name);

/// Rule deciding membership in the verifying set of preparations.
class MembershipPolicy {
public:
    MembershipPolicy(MembershipKind kind, std::optional<SpacetimeEvent> box_event,
                     std::optional<std::set<std::string>> labels);

    static MembershipPolicy naive_pure();
    static MembershipPolicy kent_light_cone(SpacetimeEvent box_event);
    static MembershipPolicy deterministic_experimenter();
    static MembershipPolicy explicit_list(std::set<std::string> labels);

    MembershipKind kind() const noexcept { return kind_; }
    const std::optional<SpacetimeEvent>& box_event() const noexcept { return box_event_; }
    const std::optional<std::set<std::string>>& labels() const noexcept { return labels_; }

private:
    MembershipKind kind_;
    std::optional<SpacetimeEvent> box_event_;
    std::optional<std::set<std::string>> labels_;
};

bool classify_membership(const Preparation& p, const MembershipPolicy& policy);

}  // namespace nlbox
