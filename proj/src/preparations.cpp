#include "nlbox/preparations.hpp"

#include <cmath>

#include "nlbox/errors.hpp"

namespace nlbox {

SpacetimeEvent::SpacetimeEvent(double t_, double x_) : t(t_), x(x_) {
    if (!std::isfinite(t) || !std::isfinite(x)) {
        throw ValidationError("SpacetimeEvent: coordinates must be finite");
    }
}

bool in_past_light_cone(const SpacetimeEvent& e, const SpacetimeEvent& box) {
    return box.t - e.t >= std::abs(box.x - e.x);
}

std::string_view to_string(ProvenanceTag tag) {
    switch (tag) {
        case ProvenanceTag::kLocalDeterministic: return "local_deterministic";
        case ProvenanceTag::kLocalEnsemble: return "local_ensemble";
        case ProvenanceTag::kRemoteSteered: return "remote_steered";
    }
    return "?";
}

ProvenanceTag provenance_tag_from_string(std::string_view name) {
    if (name == "local_deterministic") return ProvenanceTag::kLocalDeterministic;
    if (name == "local_ensemble") return ProvenanceTag::kLocalEnsemble;
    if (name == "remote_steered") return ProvenanceTag::kRemoteSteered;
    throw ValidationError("unknown provenance tag '" + std::string(name) + "'");
}

// --- Provenance ----------------------------------------------------------------

Provenance::Provenance(ProvenanceTag tag, std::vector<SpacetimeEvent> records,
                       std::optional<DensityOperator> unheralded)
    : tag_(tag), records_(std::move(records)), unheralded_(std::move(unheralded)) {
    if (records_.empty()) {
        throw ValidationError("Provenance: " + std::string(to_string(tag_)) +
                              " requires at least one record event");
    }
}

Provenance Provenance::translated(double dt, double dx) const {
    std::vector<SpacetimeEvent> moved;
    moved.reserve(records_.size());
    for (const auto& e : records_) moved.push_back(e.translated(dt, dx));
    return Provenance(tag_, std::move(moved), unheralded_);
}

// --- Preparation ---------------------------------------------------------------

namespace {

DensityOperator mix(const std::vector<EnsembleMember>& ensemble) {
    const auto n = static_cast<Eigen::Index>(ensemble.front().state.dim());
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& m : ensemble) sum += m.weight * m.state.matrix();
    return DensityOperator(std::move(sum));
}

const std::vector<EnsembleMember>& validated(const std::string& label,
                                             const std::vector<EnsembleMember>& ensemble) {
    if (ensemble.empty()) {
        throw ValidationError("Preparation '" + label + "': ensemble is empty");
    }
    double total = 0.0;
    for (const auto& m : ensemble) {
        if (!(m.weight > 0.0) || !std::isfinite(m.weight)) {
            throw ValidationError("Preparation '" + label + "': weights must be positive");
        }
        if (m.state.dim() != ensemble.front().state.dim()) {
            throw ShapeError("Preparation '" + label + "': ensemble members differ in dimension");
        }
        total += m.weight;
    }
    if (std::abs(total - 1.0) > tol::kValid) {
        throw ValidationError("Preparation '" + label + "': weights sum to " +
                              std::to_string(total) + ", expected 1");
    }
    return ensemble;
}

}  // namespace

Preparation::Preparation(std::string label, std::vector<EnsembleMember> ensemble,
                         Provenance provenance)
    : label_(std::move(label)),
      ensemble_(std::move(ensemble)),
      provenance_(std::move(provenance)),
      effective_(mix(validated(label_, ensemble_))) {
    if (provenance_.unheralded() && provenance_.unheralded()->dim() != dim()) {
        throw ShapeError("Preparation '" + label_ + "': unheralded density has wrong dimension");
    }
}

Preparation Preparation::pure(std::string label, const KetVector& ket, Provenance provenance) {
    return Preparation(std::move(label), {{1.0, DensityOperator::pure(ket)}}, std::move(provenance));
}

Preparation Preparation::translated(double dt, double dx) const {
    return Preparation(label_, ensemble_, provenance_.translated(dt, dx));
}

bool linearly_equivalent(const Preparation& a, const Preparation& b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("linearly_equivalent: preparations '" + a.label() + "' and '" +
                         b.label() + "' differ in dimension");
    }
    return trace_distance(a.effective_density(), b.effective_density()) <= tol::kEqual;
}

const DensityOperator& visible_density(const Preparation& p, const SpacetimeEvent& box_event) {
    for (const auto& e : p.provenance().records()) {
        if (!in_past_light_cone(e, box_event)) {
            const auto& unheralded = p.provenance().unheralded();
            return unheralded ? *unheralded : p.effective_density();
        }
    }
    return p.effective_density();
}

// --- MembershipPolicy ------------------------------------------------------------

std::string_view to_string(MembershipKind kind) {
    switch (kind) {
        case MembershipKind::kNaivePure: return "naive_pure";
        case MembershipKind::kKentLightCone: return "kent_light_cone";
        case MembershipKind::kDeterministicExperimenter: return "deterministic_experimenter";
        case MembershipKind::kExplicitList: return "explicit_list";
    }
    return "?";
}

MembershipKind membership_kind_from_string(std::string_view name) {
    if (name == "naive_pure") return MembershipKind::kNaivePure;
    if (name == "kent_light_cone") return MembershipKind::kKentLightCone;
    if (name == "deterministic_experimenter") return MembershipKind::kDeterministicExperimenter;
    if (name == "explicit_list") return MembershipKind::kExplicitList;
    throw ValidationError("unknown membership policy '" + std::string(name) + "'");
}

MembershipPolicy::MembershipPolicy(MembershipKind kind, std::optional<SpacetimeEvent> box_event,
                                   std::optional<std::set<std::string>> labels)
    : kind_(kind), box_event_(box_event), labels_(std::move(labels)) {
    const bool needs_event = kind_ == MembershipKind::kKentLightCone;
    const bool needs_labels = kind_ == MembershipKind::kExplicitList;
    if (needs_event != box_event_.has_value()) {
        throw ConfigurationError(std::string("MembershipPolicy ") + std::string(to_string(kind_)) +
                                 (needs_event ? ": box event required" : ": unexpected box event"));
    }
    if (needs_labels != labels_.has_value()) {
        throw ConfigurationError(std::string("MembershipPolicy ") + std::string(to_string(kind_)) +
                                 (needs_labels ? ": label list required" : ": unexpected label list"));
    }
}

MembershipPolicy MembershipPolicy::naive_pure() {
    return {MembershipKind::kNaivePure, std::nullopt, std::nullopt};
}

MembershipPolicy MembershipPolicy::kent_light_cone(SpacetimeEvent box_event) {
    return {MembershipKind::kKentLightCone, box_event, std::nullopt};
}

MembershipPolicy MembershipPolicy::deterministic_experimenter() {
    return {MembershipKind::kDeterministicExperimenter, std::nullopt, std::nullopt};
}

MembershipPolicy MembershipPolicy::explicit_list(std::set<std::string> labels) {
    return {MembershipKind::kExplicitList, std::nullopt, std::move(labels)};
}

bool classify_membership(const Preparation& p, const MembershipPolicy& policy) {
    switch (policy.kind()) {
        case MembershipKind::kNaivePure:
            for (const auto& m : p.ensemble()) {
                if (!m.state.is_pure()) return false;
            }
            return true;
        case MembershipKind::kKentLightCone:
            for (const auto& e : p.provenance().records()) {
                if (!in_past_light_cone(e, *policy.box_event())) return false;
            }
            return true;
        case MembershipKind::kDeterministicExperimenter:
            return p.provenance().tag() == ProvenanceTag::kLocalDeterministic &&
                   p.ensemble().size() == 1;
        case MembershipKind::kExplicitList:
            return policy.labels()->contains(p.label());
    }
    return false;
}

}  // namespace nlbox
