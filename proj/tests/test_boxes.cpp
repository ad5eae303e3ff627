#include <doctest.h>

#include "nlbox/boxes.hpp"
#include "nlbox/errors.hpp"
#include "nlbox/random.hpp"
#include "oracles.hpp"

using namespace nlbox;

namespace {

const SpacetimeEvent kBox{1.0, 0.0};
const SpacetimeEvent kLocal{0.0, 0.0};
const SpacetimeEvent kFar{0.0, 10.0};

Preparation local_pure(const std::string& label, const KetVector& k) {
    return Preparation::pure(label, k, Provenance(ProvenanceTag::kLocalDeterministic, {kLocal}));
}

Preparation remote_pure(const std::string& label, const KetVector& k) {
    return Preparation::pure(label, k, Provenance(ProvenanceTag::kRemoteSteered, {kFar}, DensityOperator::maximally_mixed(2)));
}

Preparation mix(const std::string& label, const KetVector& a, const KetVector& b) {
    return Preparation(label, {{0.5, DensityOperator::pure(a)}, {0.5, DensityOperator::pure(b)}},
                       Provenance(ProvenanceTag::kLocalEnsemble, {kLocal}));
}

NonlinearBox brun_box(Semantics s, MembershipPolicy m) { return NonlinearBox(BrunBoxConfig::bb84(), kBox, s, std::move(m)); }

DeutschBoxConfig deutsch(std::string_view u) { return DeutschBoxConfig(named_two_qubit_unitary(u), 2); }

}  // namespace

TEST_CASE("Brun map realizes the four specified transitions") {
    const auto cfg = BrunBoxConfig::bb84();
    const std::array<KetVector, 4> inputs{kets::zero(), kets::one(), kets::plus(), kets::minus()};
    const std::array<std::array<int, 2>, 4> expected{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto out = brun_apply_pure(cfg, inputs[i]);
        CHECK(oracle::max_abs(out.matrix(), oracle::outer(oracle::two_bit(expected[i][0], expected[i][1]))) < 1e-15);
    }
    // Global phases do not matter.
    Vector v(2);
    v << Complex(0.0, oracle::kInvSqrt2), Complex(0.0, -oracle::kInvSqrt2);
    CHECK(oracle::max_abs(brun_apply_pure(cfg, KetVector(v)).matrix(), oracle::outer(oracle::two_bit(1, 1))) < 1e-12);
}

TEST_CASE("Brun map outside its domain") {
    const auto strict = BrunBoxConfig::bb84();
    CHECK_THROWS_AS(brun_apply_pure(strict, kets::plus_i()), DomainError);
    const BrunBoxConfig identity({kets::zero(), kets::one()}, {kets::plus(), kets::minus()},
                                 [](const KetVector& k) { return brun_identity_completion(DensityOperator::pure(k)); },
                                 "identity");
    const auto out = brun_apply_pure(identity, kets::plus_i());
    CHECK(oracle::max_abs(out.matrix(), oracle::kron(DensityOperator::pure(kets::plus_i()).matrix(), oracle::outer(oracle::ket0()))) <
          1e-15);
    // Mixed inputs receive the identity completion.
    const auto mixed = brun_apply(strict, DensityOperator::maximally_mixed(2));
    CHECK(oracle::max_abs(mixed.matrix(), oracle::kron(Matrix::Identity(2, 2) / 2.0, oracle::outer(oracle::ket0()))) < 1e-15);
}

TEST_CASE("Brun configuration validation") {
    Vector short_v(2);
    short_v << 0.9, 0.0;
    CHECK_THROWS_AS(BrunBoxConfig({kets::zero(), kets::zero()}, {kets::plus(), kets::minus()}), ValidationError);
    CHECK_THROWS_AS(BrunBoxConfig({kets::zero(), kets::one()}, {kets::one(), kets::zero()}), ValidationError);
    CHECK_THROWS_AS(BrunBoxConfig({kets::zero(), kets::one()}, {kets::zero(), kets::one()}), ValidationError);
    CHECK_NOTHROW(BrunBoxConfig({kets::plus(), kets::minus()}, {kets::plus_i(), kets::minus_i()}));
}

TEST_CASE("Deutsch fixed point: SWAP returns the input") {
    Rng rng = stream_rng(31, 0);
    const auto cfg = deutsch("swap");
    for (int trial = 0; trial < 20; ++trial) {
        const auto rho = random_density(2, rng);
        CHECK(max_abs_diff(deutsch_fixed_point(cfg, rho).matrix(), rho.matrix()) < 1e-8);
        CHECK(max_abs_diff(deutsch_apply(cfg, rho).matrix(), rho.matrix()) < 1e-8);
    }
}

TEST_CASE("Deutsch fixed point: CNOT with |1> gives I/2") {
    const auto cfg = deutsch("cnot");
    const auto fixed = deutsch_fixed_point(cfg, DensityOperator::pure(kets::one()));
    CHECK(max_abs_diff(fixed.matrix(), Matrix::Identity(2, 2) / 2.0) < 1e-8);
}

TEST_CASE("property: canonical fixed point is consistent and matches Cesaro iteration") {
    Rng rng = stream_rng(32, 0);
    for (int trial = 0; trial < 15; ++trial) {
        const DeutschBoxConfig cfg(random_unitary(4, rng), 2);
        const auto rho = random_density(2, rng);
        const auto fixed = deutsch_fixed_point(cfg, rho);
        CHECK(max_abs_diff(deutsch_ctc_map(cfg, rho, fixed.matrix()), fixed.matrix()) < 1e-8);
        const auto brute = oracle::deutsch_cesaro(cfg.unitary().matrix(), rho.matrix(), 2, 4000);
        CHECK(oracle::max_abs(fixed.matrix(), brute) < 2e-3);
    }
}

TEST_CASE("Deutsch cnot_swap box: output diag(p0^2 + p1^2, 2 p0 p1)") {
    const auto cfg = deutsch("cnot_swap");
    Rng rng = stream_rng(33, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto rho = random_density(2, rng);
        const double p0 = rho.matrix()(0, 0).real();
        const double p1 = rho.matrix()(1, 1).real();
        const auto out = deutsch_apply(cfg, rho);
        CHECK(out.matrix()(0, 0).real() == doctest::Approx(p0 * p0 + p1 * p1).epsilon(1e-8));
        CHECK(out.matrix()(1, 1).real() == doctest::Approx(2.0 * p0 * p1).epsilon(1e-8));
        const auto brute_fixed = oracle::deutsch_cesaro(cfg.unitary().matrix(), rho.matrix(), 2, 20000);
        const auto brute_out = oracle::deutsch_output(cfg.unitary().matrix(), rho.matrix(), brute_fixed, 2);
        CHECK(oracle::max_abs(out.matrix(), brute_out) < 1e-3);
    }
}

TEST_CASE("Deutsch configuration validation") {
    CHECK_THROWS_AS(DeutschBoxConfig(Unitary::identity(4), 3), ShapeError);
    CHECK_THROWS_AS(DeutschBoxConfig(Unitary::identity(4), 4), ShapeError);
    CHECK_THROWS_AS(DeutschBoxConfig(Unitary::identity(4), 2, FixedPointOptions{0.0, 10}), ValidationError);
    CHECK_THROWS(named_two_qubit_unitary("toffoli"));
}

TEST_CASE("apply_box dispatch for Brun boxes") {
    const auto naive_dec = brun_box(Semantics::kDecomposition, MembershipPolicy::naive_pure());
    const auto naive_state = brun_box(Semantics::kState, MembershipPolicy::naive_pure());
    const auto kent = brun_box(Semantics::kDecomposition, MembershipPolicy::kent_light_cone(kBox));
    const Matrix ancilla0 = oracle::outer(oracle::ket0());

    const auto zmix = mix("zmix", kets::zero(), kets::one());
    const auto dec_out = apply_box(naive_dec, zmix);
    const Matrix expected_dec = 0.5 * (oracle::outer(oracle::two_bit(0, 0)) + oracle::outer(oracle::two_bit(0, 1)));
    CHECK(oracle::max_abs(dec_out.matrix(), expected_dec) < 1e-14);

    const auto state_out = apply_box(naive_state, zmix);
    CHECK(oracle::max_abs(state_out.matrix(), oracle::kron(Matrix::Identity(2, 2) / 2.0, ancilla0)) < 1e-14);

    // Remote non-member sees the unheralded I/2.
    const auto remote = apply_box(kent, remote_pure("r", kets::one()));
    CHECK(oracle::max_abs(remote.matrix(), oracle::kron(Matrix::Identity(2, 2) / 2.0, ancilla0)) < 1e-14);
    // Local member.
    const auto local = apply_box(kent, local_pure("l", kets::one()));
    CHECK(oracle::max_abs(local.matrix(), oracle::outer(oracle::two_bit(0, 1))) < 1e-14);

    CHECK_THROWS_AS(apply_box(kent, Preparation("q", {{1.0, DensityOperator::maximally_mixed(3)}},
                                                Provenance(ProvenanceTag::kLocalDeterministic, {kLocal}))),
                    ShapeError);
}

TEST_CASE("Kent readout box") {
    const NonlinearBox box(KentBoxConfig::emulating(BrunBoxConfig::bb84()), kBox, Semantics::kDecomposition,
                           MembershipPolicy::explicit_list({}));
    // Local ensemble: one readout per member.
    const auto readout = kent_readout(mix("m", kets::plus(), kets::minus()), kBox);
    CHECK(readout.readouts.size() == 2);
    CHECK_THROWS_AS(readout.readout(), MisuseError);
    const auto out = apply_box(box, mix("m", kets::plus(), kets::minus()));
    CHECK(oracle::max_abs(out.matrix(), 0.5 * (oracle::outer(oracle::two_bit(1, 0)) + oracle::outer(oracle::two_bit(1, 1)))) <
          1e-14);
    // Remote: the readout is the unheralded density.
    const auto r = kent_readout(remote_pure("r", kets::plus()), kBox);
    CHECK(max_abs_diff(r.readout().matrix(), Matrix::Identity(2, 2) / 2.0) < 1e-15);
}

TEST_CASE("linear boxes ignore membership") {
    Rng rng = stream_rng(34, 0);
    const auto channel = random_channel(2, 2, 2, rng);
    for (const auto& policy : {MembershipPolicy::naive_pure(), MembershipPolicy::explicit_list({})}) {
        const NonlinearBox box(LinearBoxConfig{channel}, kBox, Semantics::kDecomposition, policy);
        const auto a = apply_box(box, mix("a", kets::zero(), kets::one()));
        const auto b = apply_box(box, remote_pure("b", kets::plus()));
        CHECK(max_abs_diff(a.matrix(), channel.apply(DensityOperator::maximally_mixed(2)).matrix()) < 1e-14);
        CHECK(max_abs_diff(b.matrix(), channel.apply(DensityOperator::pure(kets::plus())).matrix()) < 1e-14);
    }
}

TEST_CASE("property: state semantics is density-functional for every built-in box") {
    Rng rng = stream_rng(35, 0);
    const std::vector<BoxKind> kinds{BrunBoxConfig::bb84(), deutsch("cnot_swap"), deutsch("cnot"),
                                     KentBoxConfig::emulating(BrunBoxConfig::bb84())};
    for (const auto& kind : kinds) {
        const NonlinearBox box(kind, kBox, Semantics::kState, MembershipPolicy::naive_pure());
        for (int trial = 0; trial < 10; ++trial) {
            const auto u = random_unitary(2, rng);
            const KetVector a(u.matrix().col(0));
            const KetVector b(u.matrix().col(1));
            const auto p = mix("p", a, b);
            const auto q = mix("q", kets::zero(), kets::one());
            CHECK(trace_distance(apply_box(box, p), apply_box(box, q)) < 1e-9);
        }
    }
}
