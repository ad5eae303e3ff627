#include "nlbox/boxes.hpp"

#include <cmath>
#include <sstream>

#include "nlbox/errors.hpp"

namespace nlbox {

std::string_view to_string(Semantics s) {
    return s == Semantics::kState ? "state" : "decomposition";
}

Semantics semantics_from_string(std::string_view name) {
    if (name == "state") return Semantics::kState;
    if (name == "decomposition") return Semantics::kDecomposition;
    throw ValidationError("unknown semantics '" + std::string(name) + "'");
}

DensityOperator brun_identity_completion(const DensityOperator& rho) {
    return tensor(rho, DensityOperator::pure(kets::zero()));
}

// --- Brun --------------------------------------------------------------------------

namespace {

void check_basis(const std::array<KetVector, 2>& b, const char* name) {
    for (const auto& k : b) {
        if (k.dim() != 2) {
            throw ValidationError(std::string("BrunBoxConfig: ") + name + " basis must be a qubit basis");
        }
    }
    const double overlap = std::abs(b[0].inner(b[1]));
    if (overlap > tol::kValid) {
        throw ValidationError(std::string("BrunBoxConfig: ") + name +
                              " basis is not orthonormal (overlap " + std::to_string(overlap) + ")");
    }
}

void check_non_identical(const std::array<KetVector, 2>& psi, const std::array<KetVector, 2>& phi) {
    for (const auto& a : psi) {
        for (const auto& b : phi) {
            const double o = std::abs(a.inner(b));
            if (o > 1e-6 && o < 1.0 - 1e-6) return;
        }
    }
    throw ValidationError("BrunBoxConfig: psi and phi bases must be non-identical");
}

DensityOperator two_bit_projector(int first, int second) {
    return DensityOperator::pure(KetVector::basis(4, static_cast<std::size_t>(2 * first + second)));
}

}  // namespace

BrunBoxConfig::BrunBoxConfig(std::array<KetVector, 2> psi, std::array<KetVector, 2> phi)
    : psi_(std::move(psi)), phi_(std::move(phi)) {
    check_basis(psi_, "psi");
    check_basis(phi_, "phi");
    check_non_identical(psi_, phi_);
}

BrunBoxConfig::BrunBoxConfig(std::array<KetVector, 2> psi, std::array<KetVector, 2> phi,
                             PureStateMap custom_completion, std::string completion_name)
    : BrunBoxConfig(std::move(psi), std::move(phi)) {
    custom_ = std::move(custom_completion);
    completion_name_ = std::move(completion_name);
}

BrunBoxConfig BrunBoxConfig::bb84() {
    return BrunBoxConfig({kets::zero(), kets::one()}, {kets::plus(), kets::minus()});
}

DensityOperator brun_apply_pure(const BrunBoxConfig& config, const KetVector& input) {
    if (input.dim() != 2) {
        throw ShapeError("brun_apply_pure: input must be a qubit");
    }
    const auto rho = DensityOperator::pure(input);
    for (int basis = 0; basis < 2; ++basis) {
        for (int bit = 0; bit < 2; ++bit) {
            if (fidelity(config.basis(basis)[static_cast<std::size_t>(bit)], rho) >= 1.0 - tol::kValid) {
                return two_bit_projector(basis, bit);
            }
        }
    }
    if (config.completion() == BrunCompletion::kCustom) {
        return config.custom_completion()(input);
    }
    std::ostringstream os;
    os << "brun_apply_pure: input (" << input[0] << ", " << input[1]
       << ") is none of the four states on which the map is specified";
    throw DomainError(os.str());
}

DensityOperator brun_apply(const BrunBoxConfig& config, const DensityOperator& input) {
    if (input.dim() != 2) {
        throw ShapeError("brun_apply: input must be a qubit");
    }
    if (input.is_pure()) {
        return brun_apply_pure(config, principal_ket(input));
    }
    return brun_identity_completion(input);
}

// --- Deutsch -----------------------------------------------------------------------------

DeutschBoxConfig::DeutschBoxConfig(Unitary unitary, std::size_t ctc_dim, FixedPointOptions fixed_point)
    : unitary_(std::move(unitary)), ctc_dim_(ctc_dim), fixed_point_(fixed_point) {
    if (ctc_dim_ == 0 || unitary_.dim() % ctc_dim_ != 0 || unitary_.dim() == ctc_dim_) {
        throw ShapeError("DeutschBoxConfig: unitary dim " + std::to_string(unitary_.dim()) +
                         " is not system dim x ctc dim " + std::to_string(ctc_dim_));
    }
    if (!(fixed_point_.tolerance > 0.0) || fixed_point_.max_iterations == 0) {
        throw ValidationError("DeutschBoxConfig: fixed-point tolerance and iteration cap must be positive");
    }
}

Matrix deutsch_ctc_map(const DeutschBoxConfig& config, const DensityOperator& rho_in,
                       const Matrix& sigma) {
    if (rho_in.dim() != config.system_dim()) {
        throw ShapeError("deutsch: input dim " + std::to_string(rho_in.dim()) +
                         " != system dim " + std::to_string(config.system_dim()));
    }
    const Matrix& u = config.unitary().matrix();
    const Matrix joint = u * kron(rho_in.matrix(), sigma) * u.adjoint();
    const std::array<std::size_t, 2> dims{config.system_dim(), config.ctc_dim()};
    const std::array<std::size_t, 1> keep{1};
    return partial_trace(joint, dims, keep);
}

namespace {

double ctc_residual(const DeutschBoxConfig& config, const DensityOperator& rho_in, const Matrix& sigma) {
    const Matrix diff = deutsch_ctc_map(config, rho_in, sigma) - sigma;
    return trace_norm(0.5 * (diff + diff.adjoint()));
}

// Cesaro limit of the iterates from x0: the projection of x0 onto ker(M - I)
// along range(M - I), which is a direct sum for power-bounded M.
RealVector ergodic_projection(const Eigen::MatrixXd& m, const RealVector& x0) {
    const auto n = m.rows();
    const Eigen::MatrixXd a = m - Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double threshold = 1e-10 * std::max(1.0, s.size() ? s(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > threshold) ++rank;
    if (rank == 0) return x0;
    if (rank == n) {
        // No fixed direction; cannot happen for a trace-preserving map.
        throw ConvergenceError("deutsch_fixed_point: CTC map has no fixed point");
    }
    Eigen::MatrixXd basis(n, n);
    basis.leftCols(n - rank) = svd.matrixV().rightCols(n - rank);  // kernel
    basis.rightCols(rank) = svd.matrixU().leftCols(rank);          // range
    const RealVector c = basis.fullPivLu().solve(x0);
    return basis.leftCols(n - rank) * c.head(n - rank);
}

}  // namespace

DensityOperator deutsch_fixed_point(const DeutschBoxConfig& config, const DensityOperator& rho_in) {
    const std::size_t dc = config.ctc_dim();
    const auto basis = hermitian_basis(dc);
    const auto n = static_cast<Eigen::Index>(basis.size());

    Eigen::MatrixXd m(n, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        m.col(b) = hermitian_coords(deutsch_ctc_map(config, rho_in, basis[static_cast<std::size_t>(b)]), basis);
    }
    const Matrix start = DensityOperator::maximally_mixed(dc).matrix();
    Matrix sigma = from_hermitian_coords(ergodic_projection(m, hermitian_coords(start, basis)), basis);
    sigma = 0.5 * (sigma + sigma.adjoint()).eval();
    sigma /= sigma.trace().real();

    const double tolerance = config.fixed_point().tolerance;
    double residual = ctc_residual(config, rho_in, sigma);
    if (residual > tolerance) {
        // Plain Cesaro averaging as a fallback: mean_k = (1/k) sum_{j<k} L^j(start).
        Matrix iterate = start;
        Matrix sum = Matrix::Zero(start.rows(), start.cols());
        for (std::size_t k = 1; k <= config.fixed_point().max_iterations; ++k) {
            sum += iterate;
            iterate = deutsch_ctc_map(config, rho_in, iterate);
            const Matrix mean = sum / static_cast<double>(k);
            const Matrix diff = (iterate - start) / static_cast<double>(k);  // L(mean) - mean
            residual = trace_norm(0.5 * (diff + diff.adjoint()));
            if (residual <= tolerance) {
                sigma = mean;
                break;
            }
        }
        if (residual > tolerance) {
            throw ConvergenceError("deutsch_fixed_point: residual " + std::to_string(residual) +
                                   " above tolerance after " +
                                   std::to_string(config.fixed_point().max_iterations) + " iterations");
        }
    }
    return DensityOperator(std::move(sigma));
}

DensityOperator deutsch_apply(const DeutschBoxConfig& config, const DensityOperator& rho_in) {
    const DensityOperator fixed = deutsch_fixed_point(config, rho_in);
    const Matrix& u = config.unitary().matrix();
    const Matrix joint = u * kron(rho_in.matrix(), fixed.matrix()) * u.adjoint();
    const std::array<std::size_t, 2> dims{config.system_dim(), config.ctc_dim()};
    const std::array<std::size_t, 1> keep{0};
    return DensityOperator(partial_trace(joint, dims, keep));
}

Unitary named_two_qubit_unitary(std::string_view name) {
    Matrix swap = Matrix::Zero(4, 4);
    swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
    Matrix cnot = Matrix::Zero(4, 4);  // |s c> -> |s, c xor s>
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    Matrix cnot_rev = Matrix::Zero(4, 4);  // |s c> -> |s xor c, c>
    cnot_rev(0, 0) = cnot_rev(2, 2) = cnot_rev(1, 3) = cnot_rev(3, 1) = 1.0;

    if (name == "identity") return Unitary::identity(4);
    if (name == "swap") return Unitary(swap);
    if (name == "cnot") return Unitary(cnot);
    if (name == "cnot_swap") return Unitary(cnot_rev * swap);
    throw ValidationError("unknown unitary '" + std::string(name) + "'");
}

// --- Kent --------------------------------------------------------------------------------

KentBoxConfig::KentBoxConfig(DensityMap target, std::size_t input_dim, std::size_t output_dim,
                             std::string target_name)
    : target_(std::move(target)),
      input_dim_(input_dim),
      output_dim_(output_dim),
      target_name_(std::move(target_name)) {
    if (!target_) throw ValidationError("KentBoxConfig: target map is empty");
}

KentBoxConfig KentBoxConfig::emulating(const BrunBoxConfig& brun) {
    KentBoxConfig config([brun](const DensityOperator& rho) { return brun_apply(brun, rho); }, 2, 4,
                         "brun");
    config.brun_ = brun;
    return config;
}

const DensityOperator& KentReadout::readout() const {
    if (readouts.size() != 1) {
        throw MisuseError("KentReadout: " + std::to_string(readouts.size()) +
                          " possible readouts, not a single one");
    }
    return readouts.front().state;
}

KentReadout kent_readout(const Preparation& p, const SpacetimeEvent& box_event) {
    bool all_inside = true;
    for (const auto& e : p.provenance().records()) {
        all_inside = all_inside && in_past_light_cone(e, box_event);
    }
    if (all_inside) {
        return {p.ensemble(), p};
    }
    return {{{1.0, visible_density(p, box_event)}}, p};
}

// --- NonlinearBox ----------------------------------------------------------------------------

std::string_view box_kind_name(const BoxKind& kind) {
    switch (kind.index()) {
        case 0: return "brun";
        case 1: return "deutsch";
        case 2: return "kent";
        case 3: return "linear";
    }
    return "?";
}

NonlinearBox::NonlinearBox(BoxKind kind, SpacetimeEvent event, Semantics semantics,
                           MembershipPolicy membership)
    : kind_(std::move(kind)), event_(event), semantics_(semantics), membership_(std::move(membership)) {}

std::size_t NonlinearBox::input_dim() const {
    struct Visitor {
        std::size_t operator()(const BrunBoxConfig&) const { return 2; }
        std::size_t operator()(const DeutschBoxConfig& c) const { return c.system_dim(); }
        std::size_t operator()(const KentBoxConfig& c) const { return c.input_dim(); }
        std::size_t operator()(const LinearBoxConfig& c) const { return c.channel.dim_in(); }
    };
    return std::visit(Visitor{}, kind_);
}

std::size_t NonlinearBox::output_dim() const {
    struct Visitor {
        std::size_t operator()(const BrunBoxConfig&) const { return 4; }
        std::size_t operator()(const DeutschBoxConfig& c) const { return c.system_dim(); }
        std::size_t operator()(const KentBoxConfig& c) const { return c.output_dim(); }
        std::size_t operator()(const LinearBoxConfig& c) const { return c.channel.dim_out(); }
    };
    return std::visit(Visitor{}, kind_);
}

NonlinearBox NonlinearBox::with_semantics(Semantics s) const {
    return NonlinearBox(kind_, event_, s, membership_);
}

NonlinearBox NonlinearBox::with_membership(MembershipPolicy m) const {
    return NonlinearBox(kind_, event_, semantics_, std::move(m));
}

DensityOperator NonlinearBox::map(const DensityOperator& rho) const {
    struct Visitor {
        const DensityOperator& rho;
        DensityOperator operator()(const BrunBoxConfig& c) const { return brun_apply(c, rho); }
        DensityOperator operator()(const DeutschBoxConfig& c) const { return deutsch_apply(c, rho); }
        DensityOperator operator()(const KentBoxConfig& c) const { return c.target()(rho); }
        DensityOperator operator()(const LinearBoxConfig& c) const { return c.channel.apply(rho); }
    };
    return std::visit(Visitor{rho}, kind_);
}

namespace {

DensityOperator mix_outputs(const std::vector<EnsembleMember>& ensemble,
                            const std::function<DensityOperator(const DensityOperator&)>& f) {
    Matrix sum;
    for (const auto& m : ensemble) {
        const DensityOperator out = f(m.state);
        if (sum.size() == 0) sum = Matrix::Zero(out.matrix().rows(), out.matrix().cols());
        sum += m.weight * out.matrix();
    }
    return DensityOperator(std::move(sum));
}

}  // namespace

DensityOperator apply_box(const NonlinearBox& box, const Preparation& p) {
    if (p.dim() != box.input_dim()) {
        throw ShapeError("apply_box: preparation '" + p.label() + "' has dim " +
                         std::to_string(p.dim()) + ", box expects " + std::to_string(box.input_dim()));
    }
    const auto member_map = [&box](const DensityOperator& rho) { return box.map(rho); };

    if (box.is_linear()) {
        return box.map(p.effective_density());
    }
    if (classify_membership(p, box.membership())) {
        if (box.semantics() == Semantics::kState) {
            return box.map(p.effective_density());
        }
        return mix_outputs(p.ensemble(), member_map);
    }

    const BoxKind& kind = box.kind();
    if (std::holds_alternative<BrunBoxConfig>(kind)) {
        return brun_identity_completion(visible_density(p, box.event()));
    }
    if (const auto* deutsch = std::get_if<DeutschBoxConfig>(&kind)) {
        return deutsch_apply(*deutsch, visible_density(p, box.event()));
    }
    const auto& kent = std::get<KentBoxConfig>(kind);
    return mix_outputs(kent_readout(p, box.event()).readouts, kent.target());
}

}  // namespace nlbox
