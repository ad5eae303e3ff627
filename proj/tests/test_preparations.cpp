#include <doctest.h>

#include "nlbox/errors.hpp"
#include "nlbox/preparations.hpp"
#include "nlbox/random.hpp"

using namespace nlbox;

namespace {

Provenance local(ProvenanceTag tag = ProvenanceTag::kLocalDeterministic, SpacetimeEvent at = {0.0, 0.0}) {
    return Provenance(tag, {at});
}

Preparation mixture(const std::string& label, const KetVector& a, const KetVector& b, Provenance prov) {
    return Preparation(label, {{0.5, DensityOperator::pure(a)}, {0.5, DensityOperator::pure(b)}}, std::move(prov));
}

}  // namespace

TEST_CASE("light cone uses c = 1 and includes the boundary") {
    const SpacetimeEvent box{1.0, 0.0};
    CHECK(in_past_light_cone({0.0, 0.0}, box));
    CHECK(in_past_light_cone({0.0, 1.0}, box));
    CHECK(in_past_light_cone({0.0, -1.0}, box));
    CHECK_FALSE(in_past_light_cone({0.0, 10.0}, box));
    CHECK_FALSE(in_past_light_cone({2.0, 0.0}, box));
    CHECK_THROWS_AS(SpacetimeEvent(std::nan(""), 0.0), ValidationError);
}

TEST_CASE("provenance requires at least one record") {
    CHECK_THROWS_AS(Provenance(ProvenanceTag::kLocalEnsemble, {}), ValidationError);
    for (auto tag : {ProvenanceTag::kLocalDeterministic, ProvenanceTag::kLocalEnsemble, ProvenanceTag::kRemoteSteered}) {
        CHECK(provenance_tag_from_string(to_string(tag)) == tag);
    }
    CHECK_THROWS(provenance_tag_from_string("telepathic"));
}

TEST_CASE("preparation weights are validated") {
    CHECK_THROWS_AS(Preparation("p", {{0.6, DensityOperator::pure(kets::zero())}}, local()), ValidationError);
    CHECK_THROWS_AS(Preparation("p", {}, local()), ValidationError);
    CHECK_THROWS_AS(Preparation("p", {{1.5, DensityOperator::pure(kets::zero())}, {-0.5, DensityOperator::pure(kets::one())}},
                                local()),
                    ValidationError);
    CHECK_THROWS(Preparation("p", {{0.5, DensityOperator::pure(kets::zero())},
                                   {0.5, DensityOperator::maximally_mixed(3)}},
                             local()));
}

TEST_CASE("matched mixtures are linearly equivalent") {
    const auto z = mixture("z", kets::zero(), kets::one(), local(ProvenanceTag::kLocalEnsemble));
    const auto x = mixture("x", kets::plus(), kets::minus(), local(ProvenanceTag::kLocalEnsemble));
    const auto y = mixture("y", kets::plus_i(), kets::minus_i(), local(ProvenanceTag::kLocalEnsemble));
    CHECK(linearly_equivalent(z, x));
    CHECK(linearly_equivalent(x, y));
    CHECK(linearly_equivalent(x, z));
    const auto zero = Preparation::pure("0", kets::zero(), local());
    CHECK_FALSE(linearly_equivalent(zero, z));
    const auto qutrit = Preparation("q", {{1.0, DensityOperator::maximally_mixed(3)}}, local());
    CHECK_THROWS_AS(linearly_equivalent(zero, qutrit), ShapeError);
}

TEST_CASE("membership policies check their parameters") {
    CHECK_THROWS_AS(MembershipPolicy(MembershipKind::kKentLightCone, std::nullopt, std::nullopt), ConfigurationError);
    CHECK_THROWS_AS(MembershipPolicy(MembershipKind::kExplicitList, std::nullopt, std::nullopt), ConfigurationError);
    CHECK_THROWS_AS(MembershipPolicy(MembershipKind::kNaivePure, SpacetimeEvent{0, 0}, std::nullopt), ConfigurationError);
    for (auto k : {MembershipKind::kNaivePure, MembershipKind::kKentLightCone, MembershipKind::kDeterministicExperimenter,
                   MembershipKind::kExplicitList}) {
        CHECK(membership_kind_from_string(to_string(k)) == k);
    }
}

TEST_CASE("membership classification table") {
    const SpacetimeEvent box{1.0, 0.0};
    const auto local_pure = Preparation::pure("a", kets::zero(), local());
    const auto local_mix = mixture("b", kets::zero(), kets::one(), local(ProvenanceTag::kLocalEnsemble));
    const auto remote = Preparation::pure("c", kets::one(), Provenance(ProvenanceTag::kRemoteSteered, {{0.0, 10.0}},
                                                                       DensityOperator::maximally_mixed(2)));
    const auto mixed_member = Preparation("d", {{1.0, DensityOperator::maximally_mixed(2)}}, local());

    const auto naive = MembershipPolicy::naive_pure();
    CHECK(classify_membership(local_pure, naive));
    CHECK(classify_membership(local_mix, naive));
    CHECK(classify_membership(remote, naive));
    CHECK_FALSE(classify_membership(mixed_member, naive));

    const auto kent = MembershipPolicy::kent_light_cone(box);
    CHECK(classify_membership(local_pure, kent));
    CHECK(classify_membership(local_mix, kent));
    CHECK_FALSE(classify_membership(remote, kent));

    const auto experimenter = MembershipPolicy::deterministic_experimenter();
    CHECK(classify_membership(local_pure, experimenter));
    CHECK_FALSE(classify_membership(local_mix, experimenter));
    CHECK_FALSE(classify_membership(remote, experimenter));

    const auto listed = MembershipPolicy::explicit_list({"a", "c"});
    CHECK(classify_membership(local_pure, listed));
    CHECK_FALSE(classify_membership(local_mix, listed));
    CHECK(classify_membership(remote, listed));
}

TEST_CASE("visible density falls back to the unheralded state outside the light cone") {
    const SpacetimeEvent box{1.0, 0.0};
    const auto remote = Preparation::pure("r", kets::one(), Provenance(ProvenanceTag::kRemoteSteered, {{0.0, 10.0}},
                                                                       DensityOperator::maximally_mixed(2)));
    CHECK(max_abs_diff(visible_density(remote, box).matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-15);
    CHECK(max_abs_diff(visible_density(remote, {20.0, 0.0}).matrix(), remote.effective_density().matrix()) < 1e-15);
    const auto no_fallback = Preparation::pure("s", kets::one(), Provenance(ProvenanceTag::kRemoteSteered, {{0.0, 10.0}}));
    CHECK(max_abs_diff(visible_density(no_fallback, box).matrix(), no_fallback.effective_density().matrix()) < 1e-15);
}

TEST_CASE("property: membership is invariant under joint spacetime translation") {
    Rng rng = stream_rng(21, 0);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const SpacetimeEvent box{coord(rng), coord(rng)};
        const auto p = Preparation::pure("p", random_ket(2, rng),
                                         Provenance(ProvenanceTag::kLocalEnsemble, {{coord(rng), coord(rng)}}));
        const double dt = shift(rng);
        const double dx = shift(rng);
        const bool before = classify_membership(p, MembershipPolicy::kent_light_cone(box));
        const bool after = classify_membership(p.translated(dt, dx),
                                               MembershipPolicy::kent_light_cone(box.translated(dt, dx)));
        CHECK(before == after);
    }
}

TEST_CASE("property: effective density is the weighted member average") {
    Rng rng = stream_rng(22, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_density(3, rng);
        const auto b = random_density(3, 1, rng);
        const double w = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const Preparation p("p", {{w, a}, {1.0 - w, b}}, local(ProvenanceTag::kLocalEnsemble));
        CHECK(max_abs_diff(p.effective_density().matrix(), w * a.matrix() + (1.0 - w) * b.matrix()) < 1e-12);
    }
}
