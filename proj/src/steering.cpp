#include "nlbox/steering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlbox/errors.hpp"

namespace nlbox {

namespace {

constexpr double kSupportThreshold = 1e-12;

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Vector with_phase_convention(Vector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            v *= std::abs(v(i)) / v(i);
            v(i) = std::abs(v(i));
            break;
        }
    }
    return v;
}

bool lexicographically_less(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
        if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
    }
    return false;
}

struct Eigenpair {
    double value;
    Vector vector;
};

/// Nonzero eigenpairs, eigenvalues descending, degenerate runs ordered
/// lexicographically after the phase convention.
std::vector<Eigenpair> support_eigenpairs(const Matrix& rho) {
    const auto eig = eigh(rho);
    std::vector<Eigenpair> pairs;
    for (Eigen::Index k = eig.values.size(); k-- > 0;) {
        if (eig.values(k) > kSupportThreshold) {
            pairs.push_back({eig.values(k), with_phase_convention(eig.vectors.col(k))});
        }
    }
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= pairs.size(); ++i) {
        if (i == pairs.size() || pairs[run_start].value - pairs[i].value > 1e-12) {
            std::sort(pairs.begin() + static_cast<std::ptrdiff_t>(run_start),
                      pairs.begin() + static_cast<std::ptrdiff_t>(i),
                      [](const Eigenpair& a, const Eigenpair& b) {
                          return lexicographically_less(a.vector, b.vector);
                      });
            run_start = i;
        }
    }
    return pairs;
}

Matrix inverse_sqrt_psd(const Matrix& s) {
    const auto eig = eigh(s);
    Matrix d = Matrix::Zero(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        d(i, i) = 1.0 / std::sqrt(eig.values(i));
    }
    return eig.vectors * d * eig.vectors.adjoint();
}

}  // namespace

EnsembleDecomposition::EnsembleDecomposition(DensityOperator sigma_b, std::vector<EnsembleMember> members)
    : sigma_b_(std::move(sigma_b)), members_(std::move(members)) {
    if (members_.empty()) {
        throw DecompositionError("EnsembleDecomposition: no members");
    }
    const auto n = static_cast<Eigen::Index>(sigma_b_.dim());
    Matrix sum = Matrix::Zero(n, n);
    double total = 0.0;
    for (const auto& m : members_) {
        if (m.state.dim() != sigma_b_.dim()) {
            throw DecompositionError("EnsembleDecomposition: member dimension mismatch");
        }
        if (!(m.weight > 0.0)) {
            throw DecompositionError("EnsembleDecomposition: weights must be positive");
        }
        total += m.weight;
        sum += m.weight * m.state.matrix();
    }
    if (std::abs(total - 1.0) > tol::kValid) {
        throw DecompositionError("EnsembleDecomposition: weights sum to " + std::to_string(total));
    }
    const double defect = max_abs_diff(sum, sigma_b_.matrix());
    if (defect > tol::kEqual) {
        throw DecompositionError("EnsembleDecomposition: members average differs from sigma_B by " +
                                 std::to_string(defect));
    }
}

EnsembleDecomposition EnsembleDecomposition::of(std::vector<EnsembleMember> members) {
    if (members.empty()) {
        throw DecompositionError("EnsembleDecomposition: no members");
    }
    const auto n = static_cast<Eigen::Index>(members.front().state.dim());
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& m : members) {
        if (m.state.dim() != members.front().state.dim()) {
            throw DecompositionError("EnsembleDecomposition: member dimension mismatch");
        }
        sum += m.weight * m.state.matrix();
    }
    double total = 0.0;
    for (const auto& m : members) total += m.weight;
    if (!(total > 0.0)) throw DecompositionError("EnsembleDecomposition: weights must be positive");
    return EnsembleDecomposition(DensityOperator(sum / total), std::move(members));
}

SteeringAssemblage make_assemblage(DensityOperator state_ab, Povm povm_a, std::size_t dim_b) {
    if (dim_b == 0 || state_ab.dim() % dim_b != 0) {
        throw ShapeError("make_assemblage: state dim " + std::to_string(state_ab.dim()) +
                         " is not divisible by dim_b " + std::to_string(dim_b));
    }
    const std::size_t dim_a = state_ab.dim() / dim_b;
    if (povm_a.dim() != dim_a) {
        throw ShapeError("make_assemblage: POVM acts on dim " + std::to_string(povm_a.dim()) +
                         ", A has dim " + std::to_string(dim_a));
    }
    SteeringAssemblage out{std::move(state_ab), std::move(povm_a), dim_a, dim_b, {}};
    out.heralded.reserve(out.povm_a.size());
    for (std::size_t i = 0; i < out.povm_a.size(); ++i) {
        try {
            auto s = steer(out, i);
            out.heralded.push_back({s.probability, std::move(s.state)});
        } catch (const UndefinedConditionalError&) {
            out.heralded.push_back({0.0, DensityOperator::maximally_mixed(dim_b)});
        }
    }
    return out;
}

KetVector purify(const DensityOperator& sigma_b) {
    const auto pairs = support_eigenpairs(sigma_b.matrix());
    const auto db = static_cast<Eigen::Index>(sigma_b.dim());
    const auto r = static_cast<Eigen::Index>(pairs.size());
    Vector psi = Vector::Zero(r * db);
    for (Eigen::Index k = 0; k < r; ++k) {
        psi.segment(k * db, db) = std::sqrt(pairs[static_cast<std::size_t>(k)].value) *
                                  pairs[static_cast<std::size_t>(k)].vector;
    }
    psi.normalize();
    return KetVector(std::move(psi));
}

SteeringAssemblage hjw_assemblage(const EnsembleDecomposition& d) {
    if (d.members().size() > kMaxDecompositionMembers) {
        throw DecompositionError("hjw_assemblage: " + std::to_string(d.members().size()) +
                                 " members exceed the limit of " +
                                 std::to_string(kMaxDecompositionMembers));
    }
    const auto support = support_eigenpairs(d.sigma_b().matrix());
    const auto r = static_cast<Eigen::Index>(support.size());

    // For each pure sub-member v = sqrt(p_i mu_ij) f_ij, the A-vector a with
    // (<a| (x) I)|Psi> = v has components conj(<e_k|v>) / sqrt(l_k).
    std::vector<Matrix> effects;
    effects.reserve(d.members().size());
    for (const auto& member : d.members()) {
        Matrix e = Matrix::Zero(r, r);
        const auto eig = eigh(member.state.matrix());
        for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
            const double mu = eig.values(j);
            if (mu <= 1e-14) continue;
            const Vector v = std::sqrt(member.weight * mu) * eig.vectors.col(j);
            Vector a(r);
            for (Eigen::Index k = 0; k < r; ++k) {
                const auto& pk = support[static_cast<std::size_t>(k)];
                a(k) = std::conj(pk.vector.dot(v)) / std::sqrt(pk.value);
            }
            e += a * a.adjoint();
        }
        effects.push_back(std::move(e));
    }

    // Absorb the rounding of sum_m E_m = I into a symmetric renormalization.
    Matrix total = Matrix::Zero(r, r);
    for (const auto& e : effects) total += e;
    const Matrix fix = inverse_sqrt_psd(hermitian_part(total));
    for (auto& e : effects) e = hermitian_part(fix * e * fix);

    const KetVector psi = purify(d.sigma_b());
    return make_assemblage(DensityOperator::pure(psi), Povm(std::move(effects)), d.sigma_b().dim());
}

SteeredState steer(const SteeringAssemblage& assemblage, std::size_t outcome) {
    if (outcome >= assemblage.povm_a.size()) {
        throw ShapeError("steer: outcome " + std::to_string(outcome) + " out of range (" +
                         std::to_string(assemblage.povm_a.size()) + " outcomes)");
    }
    const auto db = static_cast<Eigen::Index>(assemblage.dim_b);
    const Matrix lifted =
        kron(assemblage.povm_a.effect(outcome), Matrix::Identity(db, db)) * assemblage.state_ab.matrix();
    const double probability = lifted.trace().real();
    if (probability <= kSupportThreshold) {
        throw UndefinedConditionalError("steer: outcome " + std::to_string(outcome) +
                                        " has zero probability");
    }
    const std::array<std::size_t, 2> dims{assemblage.dim_a, assemblage.dim_b};
    const std::array<std::size_t, 1> keep{1};
    Matrix conditional = hermitian_part(partial_trace(lifted, dims, keep)) / probability;
    conditional /= conditional.trace().real();
    return {probability, DensityOperator(std::move(conditional))};
}

std::vector<RemotePreparation> remote_preparations(const SteeringAssemblage& assemblage,
                                             const SpacetimeEvent& alice_event,
                                             const std::string& label_prefix) {
    const std::array<std::size_t, 2> dims{assemblage.dim_a, assemblage.dim_b};
    const std::array<std::size_t, 1> keep{1};
    const DensityOperator marginal = partial_trace(assemblage.state_ab, dims, keep);
    std::vector<RemotePreparation> preps;
    for (std::size_t i = 0; i < assemblage.heralded.size(); ++i) {
        const auto& h = assemblage.heralded[i];
        if (h.weight <= kSupportThreshold) continue;
        preps.push_back({i, h.weight,
                         Preparation(label_prefix + std::to_string(i), {{1.0, h.state}},
                                     Provenance(ProvenanceTag::kRemoteSteered, {alice_event}, marginal))});
    }
    return preps;
}

}  // namespace nlbox
