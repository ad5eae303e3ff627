#include "nlbox/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlbox/errors.hpp"

namespace nlbox {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ShapeError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

double hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& hermitian) {
    return eigh(hermitian).values.minCoeff();
}

Complex phase_of_first_nonzero(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            return v(i) / std::abs(v(i));
        }
    }
    return {1.0, 0.0};
}

}  // namespace

// --- KetVector ---------------------------------------------------------------

KetVector::KetVector(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) {
        throw ShapeError("KetVector: dimension must be positive");
    }
    const double norm2 = amplitudes_.squaredNorm();
    if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > tol::kValid) {
        throw ValidationError("KetVector: squared norm must be 1, got " + fmt(norm2));
    }
}

KetVector KetVector::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) {
        throw ShapeError("KetVector::basis: index " + std::to_string(index) +
                         " out of range for dim " + std::to_string(dim));
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return KetVector(std::move(v));
}

Complex KetVector::inner(const KetVector& other) const {
    if (other.dim() != dim()) {
        throw ShapeError("KetVector::inner: dimension mismatch");
    }
    return amplitudes_.dot(other.amplitudes_);
}

DensityOperator KetVector::projector() const { return DensityOperator::pure(*this); }

// --- DensityOperator ---------------------------------------------------------

DensityOperator::DensityOperator(Matrix matrix) : matrix_(std::move(matrix)) {
    require_square(matrix_, "DensityOperator");
    if (!matrix_.allFinite()) {
        throw ValidationError("DensityOperator: non-finite entry");
    }
    const double herm = hermiticity_defect(matrix_);
    if (herm > tol::kValid) {
        throw ValidationError("DensityOperator: not Hermitian (max |M - M^dag| = " + fmt(herm) +
                              ")");
    }
    matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > tol::kValid) {
        throw ValidationError("DensityOperator: trace must be 1, got " + fmt(tr));
    }
    const double lo = min_eigenvalue(matrix_);
    if (lo < -tol::kValid) {
        throw ValidationError("DensityOperator: negative eigenvalue " + fmt(lo));
    }
}

DensityOperator DensityOperator::pure(const KetVector& ket) {
    return DensityOperator(ket.amplitudes() * ket.amplitudes().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return DensityOperator(Matrix::Identity(n, n) / static_cast<double>(dim));
}

double DensityOperator::purity() const {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return matrix_.squaredNorm();
}

// --- Povm --------------------------------------------------------------------

Povm::Povm(std::vector<Matrix> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) {
        throw ValidationError("Povm: needs at least one effect");
    }
    require_square(effects_.front(), "Povm");
    dim_ = static_cast<std::size_t>(effects_.front().rows());
    const auto n = static_cast<Eigen::Index>(dim_);
    Matrix sum = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < effects_.size(); ++k) {
        Matrix& e = effects_[k];
        if (e.rows() != n || e.cols() != n) {
            throw ShapeError("Povm: effect " + std::to_string(k) + " has wrong shape");
        }
        if (hermiticity_defect(e) > tol::kValid) {
            throw ValidationError("Povm: effect " + std::to_string(k) + " is not Hermitian");
        }
        e = 0.5 * (e + e.adjoint()).eval();
        const double lo = min_eigenvalue(e);
        if (lo < -tol::kValid) {
            throw ValidationError("Povm: effect " + std::to_string(k) +
                                  " is not PSD (eigenvalue " + fmt(lo) + ")");
        }
        sum += e;
    }
    const double defect = max_abs_diff(sum, Matrix::Identity(n, n));
    if (defect > tol::kValid) {
        throw ValidationError("Povm: effects do not sum to identity (defect " + fmt(defect) + ")");
    }
}

Povm Povm::projective(std::span<const KetVector> basis) {
    std::vector<Matrix> effects;
    effects.reserve(basis.size());
    for (const auto& ket : basis) {
        effects.push_back(ket.amplitudes() * ket.amplitudes().adjoint());
    }
    return Povm(std::move(effects));
}

Povm Povm::computational(std::size_t dim) {
    std::vector<KetVector> basis;
    basis.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        basis.push_back(KetVector::basis(dim, i));
    }
    return projective(basis);
}

// --- Unitary -----------------------------------------------------------------

Unitary::Unitary(Matrix matrix) : matrix_(std::move(matrix)) {
    require_square(matrix_, "Unitary");
    const auto n = matrix_.rows();
    const double defect = max_abs_diff(matrix_.adjoint() * matrix_, Matrix::Identity(n, n));
    if (defect > tol::kValid) {
        throw ValidationError("Unitary: U^dag U deviates from identity by " + fmt(defect));
    }
}

Unitary Unitary::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Unitary(Matrix::Identity(n, n));
}

// --- Channel -----------------------------------------------------------------

Channel::Channel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) {
        throw ValidationError("Channel: needs at least one Kraus operator");
    }
    dim_out_ = static_cast<std::size_t>(kraus_.front().rows());
    dim_in_ = static_cast<std::size_t>(kraus_.front().cols());
    if (dim_in_ == 0 || dim_out_ == 0) {
        throw ShapeError("Channel: empty Kraus operator");
    }
    const auto n = static_cast<Eigen::Index>(dim_in_);
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& k : kraus_) {
        if (static_cast<std::size_t>(k.rows()) != dim_out_ ||
            static_cast<std::size_t>(k.cols()) != dim_in_) {
            throw ShapeError("Channel: Kraus operators must share one shape");
        }
        sum += k.adjoint() * k;
    }
    const double defect = max_abs_diff(sum, Matrix::Identity(n, n));
    if (defect > tol::kValid) {
        throw ValidationError("Channel: not trace preserving (defect " + fmt(defect) + ")");
    }
}

Channel Channel::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Channel({Matrix::Identity(n, n)});
}

Channel Channel::from_unitary(const Unitary& u) { return Channel({u.matrix()}); }

DensityOperator Channel::apply(const DensityOperator& rho) const {
    if (rho.dim() != dim_in_) {
        throw ShapeError("Channel::apply: input dim " + std::to_string(rho.dim()) +
                         " != channel input dim " + std::to_string(dim_in_));
    }
    const auto n = static_cast<Eigen::Index>(dim_out_);
    Matrix out = Matrix::Zero(n, n);
    for (const auto& k : kraus_) {
        out += k * rho.matrix() * k.adjoint();
    }
    return DensityOperator(std::move(out));
}

// --- free functions ----------------------------------------------------------

EigenDecomposition eigh(const Matrix& a) {
    require_square(a, "eigh");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigh: Hermitian eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace {
void check_capacity(std::size_t a, std::size_t b) {
    if (a * b > kMaxTotalDim) {
        throw CapacityError("tensor: dimension " + std::to_string(a) + "*" + std::to_string(b) +
                            " exceeds capacity " + std::to_string(kMaxTotalDim));
    }
}
}  // namespace

KetVector tensor(const KetVector& a, const KetVector& b) {
    check_capacity(a.dim(), b.dim());
    Vector v(a.amplitudes().size() * b.amplitudes().size());
    for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
        v.segment(i * b.amplitudes().size(), b.amplitudes().size()) =
            a.amplitudes()(i) * b.amplitudes();
    }
    return KetVector(std::move(v));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    check_capacity(a.dim(), b.dim());
    return DensityOperator(kron(a.matrix(), b.matrix()));
}

Matrix partial_trace(const Matrix& m, std::span<const std::size_t> dims,
                     std::span<const std::size_t> keep) {
    require_square(m, "partial_trace");
    std::size_t total = 1;
    for (auto d : dims) {
        if (d == 0) {
            throw ShapeError("partial_trace: zero factor dimension");
        }
        total *= d;
    }
    if (total != static_cast<std::size_t>(m.rows())) {
        throw ShapeError("partial_trace: factor dims multiply to " + std::to_string(total) +
                         " but operator has dim " + std::to_string(m.rows()));
    }
    std::vector<bool> kept(dims.size(), false);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= dims.size()) {
            throw ShapeError("partial_trace: subsystem index " + std::to_string(keep[i]) +
                             " out of range");
        }
        if (i > 0 && keep[i] <= keep[i - 1]) {
            throw ShapeError("partial_trace: keep indices must be strictly ascending");
        }
        kept[keep[i]] = true;
    }

    // Split every full index into (kept index, traced index), both row-major.
    std::vector<std::size_t> kept_idx(total), traced_idx(total);
    std::size_t kept_dim = 1;
    for (std::size_t f = 0; f < dims.size(); ++f) {
        if (kept[f]) kept_dim *= dims[f];
    }
    for (std::size_t full = 0; full < total; ++full) {
        std::size_t rem = full;
        std::size_t k = 0, t = 0, kstride = 1, tstride = 1;
        for (std::size_t f = dims.size(); f-- > 0;) {
            const std::size_t digit = rem % dims[f];
            rem /= dims[f];
            if (kept[f]) {
                k += digit * kstride;
                kstride *= dims[f];
            } else {
                t += digit * tstride;
                tstride *= dims[f];
            }
        }
        kept_idx[full] = k;
        traced_idx[full] = t;
    }

    const auto kd = static_cast<Eigen::Index>(kept_dim);
    Matrix out = Matrix::Zero(kd, kd);
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t j = 0; j < total; ++j) {
            if (traced_idx[i] == traced_idx[j]) {
                out(static_cast<Eigen::Index>(kept_idx[i]), static_cast<Eigen::Index>(kept_idx[j])) +=
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    }
    return out;
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> dims,
                              std::span<const std::size_t> keep) {
    return DensityOperator(partial_trace(rho.matrix(), dims, keep));
}

std::vector<double> born_probabilities(const DensityOperator& rho, const Povm& m) {
    if (rho.dim() != m.dim()) {
        throw ShapeError("born_probabilities: state dim " + std::to_string(rho.dim()) +
                         " != measurement dim " + std::to_string(m.dim()));
    }
    std::vector<double> p;
    p.reserve(m.size());
    for (const auto& e : m.effects()) {
        double v = (e * rho.matrix()).trace().real();
        if (v < 0.0 && v >= -tol::kClamp) v = 0.0;
        p.push_back(std::max(v, 0.0));
    }
    return p;
}

double trace_norm(const Matrix& hermitian) { return eigh(hermitian).values.cwiseAbs().sum(); }

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    if (a.dim() != b.dim()) {
        throw ShapeError("trace_distance: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
    }
    return std::clamp(0.5 * trace_norm(a.matrix() - b.matrix()), 0.0, 1.0);
}

double fidelity(const KetVector& psi, const DensityOperator& rho) {
    if (psi.dim() != rho.dim()) {
        throw ShapeError("fidelity: dimension mismatch");
    }
    return psi.amplitudes().dot(rho.matrix() * psi.amplitudes()).real();
}

KetVector principal_ket(const DensityOperator& rho) {
    const auto eig = eigh(rho.matrix());
    Vector v = eig.vectors.col(eig.vectors.cols() - 1);
    v /= phase_of_first_nonzero(v);
    v.normalize();
    return KetVector(std::move(v));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("max_abs_diff: shape mismatch");
    }
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

std::vector<Matrix> hermitian_basis(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    std::vector<Matrix> basis;
    basis.reserve(d * d);
    basis.push_back(Matrix::Identity(n, n) / std::sqrt(static_cast<double>(d)));
    for (Eigen::Index l = 1; l < n; ++l) {
        Matrix g = Matrix::Zero(n, n);
        for (Eigen::Index k = 0; k < l; ++k) g(k, k) = 1.0;
        g(l, l) = -static_cast<double>(l);
        basis.push_back(g / std::sqrt(static_cast<double>(l * (l + 1))));
    }
    const double s = 1.0 / std::sqrt(2.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j + 1; k < n; ++k) {
            Matrix sym = Matrix::Zero(n, n);
            sym(j, k) = s;
            sym(k, j) = s;
            basis.push_back(std::move(sym));
            Matrix anti = Matrix::Zero(n, n);
            anti(j, k) = Complex(0.0, -s);
            anti(k, j) = Complex(0.0, s);
            basis.push_back(std::move(anti));
        }
    }
    return basis;
}

RealVector hermitian_coords(const Matrix& h, std::span<const Matrix> basis) {
    RealVector c(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        c(static_cast<Eigen::Index>(a)) = (basis[a] * h).trace().real();
    }
    return c;
}

Matrix from_hermitian_coords(const RealVector& coords, std::span<const Matrix> basis) {
    if (static_cast<std::size_t>(coords.size()) != basis.size() || basis.empty()) {
        throw ShapeError("from_hermitian_coords: coordinate count does not match basis");
    }
    Matrix out = Matrix::Zero(basis.front().rows(), basis.front().cols());
    for (std::size_t a = 0; a < basis.size(); ++a) {
        out += coords(static_cast<Eigen::Index>(a)) * basis[a];
    }
    return out;
}

namespace kets {

namespace {
KetVector qubit(Complex a, Complex b) {
    Vector v(2);
    v << a, b;
    return KetVector(std::move(v));
}
}  // namespace

KetVector zero() { return KetVector::basis(2, 0); }
KetVector one() { return KetVector::basis(2, 1); }
KetVector plus() { return qubit(M_SQRT1_2, M_SQRT1_2); }
KetVector minus() { return qubit(M_SQRT1_2, -M_SQRT1_2); }
KetVector plus_i() { return qubit(M_SQRT1_2, Complex(0.0, M_SQRT1_2)); }
KetVector minus_i() { return qubit(M_SQRT1_2, Complex(0.0, -M_SQRT1_2)); }

KetVector singlet() {
    Vector v = Vector::Zero(4);
    v(1) = M_SQRT1_2;
    v(2) = -M_SQRT1_2;
    return KetVector(std::move(v));
}

}  // namespace kets

}  // namespace nlbox
