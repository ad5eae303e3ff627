#pragma once

// Dense finite-dimensional quantum kinematics: kets, density operators,
// measurements, unitaries and channels, with validating constructors.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nlbox {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
/// Validity checks on constructed values (norms, Hermiticity, positivity).
inline constexpr double kValid = 1e-9;
/// Derived equalities between computed quantities.
inline constexpr double kEqual = 1e-8;
/// Probabilities in [-kClamp, 0) are rounding noise and are clamped to 0.
inline constexpr double kClamp = 1e-12;
}  // namespace tol

/// Largest Hilbert-space dimension `tensor` will build.
inline constexpr std::size_t kMaxTotalDim = std::size_t{1} << 12;

class DensityOperator;

/// Unit vector in C^dim.
class KetVector {
public:
    explicit KetVector(Vector amplitudes);

    static KetVector basis(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

    /// <this|other>
    Complex inner(const KetVector& other) const;
    DensityOperator projector() const;

private:
    Vector amplitudes_;
};

/// Trace-one positive semidefinite Hermitian matrix.
class DensityOperator {
public:
    explicit DensityOperator(Matrix matrix);

    static DensityOperator pure(const KetVector& ket);
    static DensityOperator maximally_mixed(std::size_t dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix& matrix() const noexcept { return matrix_; }

    /// Tr(rho^2)
    double purity() const;
    bool is_pure() const { return purity() >= 1.0 - tol::kValid; }

private:
    Matrix matrix_;
};

/// Positive operator-valued measure; effects are PSD and sum to the identity.
class Povm {
public:
    explicit Povm(std::vector<Matrix> effects);

    /// Rank-one projectors onto an orthonormal basis.
    static Povm projective(std::span<const KetVector> basis);
    static Povm computational(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return effects_.size(); }
    const std::vector<Matrix>& effects() const noexcept { return effects_; }
    const Matrix& effect(std::size_t k) const { return effects_.at(k); }

private:
    std::size_t dim_ = 0;
    std::vector<Matrix> effects_;
};

class Unitary {
public:
    explicit Unitary(Matrix matrix);

    static Unitary identity(std::size_t dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix& matrix() const noexcept { return matrix_; }

private:
    Matrix matrix_;
};

/// Completely positive trace-preserving map in Kraus form, sum K^dag K = I.
class Channel {
public:
    explicit Channel(std::vector<Matrix> kraus);

    static Channel identity(std::size_t dim);
    static Channel from_unitary(const Unitary& u);

    std::size_t dim_in() const noexcept { return dim_in_; }
    std::size_t dim_out() const noexcept { return dim_out_; }
    const std::vector<Matrix>& kraus() const noexcept { return kraus_; }

    DensityOperator apply(const DensityOperator& rho) const;

private:
    std::size_t dim_in_ = 0;
    std::size_t dim_out_ = 0;
    std::vector<Matrix> kraus_;
};

/// Eigenvalues ascending, eigenvectors as columns.
struct EigenDecomposition {
    RealVector values;
    Matrix vectors;
};

/// Hermitian eigensolver. Only the lower triangle of `a` is read.
EigenDecomposition eigh(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

KetVector tensor(const KetVector& a, const KetVector& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

/// Reduce a matrix on prod(dims) to the factors listed in `keep` (ascending).
/// Works on arbitrary (also unnormalized) operators.
Matrix partial_trace(const Matrix& m, std::span<const std::size_t> dims,
                     std::span<const std::size_t> keep);
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> dims,
                              std::span<const std::size_t> keep);

/// Tr(E_k rho) for each effect.
std::vector<double> born_probabilities(const DensityOperator& rho, const Povm& m);

/// Half the trace norm of a - b.
double trace_distance(const DensityOperator& a, const DensityOperator& b);
/// Sum of absolute eigenvalues of a Hermitian matrix.
double trace_norm(const Matrix& hermitian);

/// <psi|rho|psi>
double fidelity(const KetVector& psi, const DensityOperator& rho);

/// Eigenvector of the largest eigenvalue, first nonzero amplitude made real
/// positive.
KetVector principal_ket(const DensityOperator& rho);

double max_abs_diff(const Matrix& a, const Matrix& b);

/// Orthonormal Hermitian operator basis of d x d matrices under the
/// Hilbert-Schmidt inner product. Element 0 is I/sqrt(d); the rest are
/// traceless generalized Gell-Mann matrices.
std::vector<Matrix> hermitian_basis(std::size_t d);

/// Real coordinates Tr(G_a h) of a Hermitian matrix in `basis`.
RealVector hermitian_coords(const Matrix& h, std::span<const Matrix> basis);
Matrix from_hermitian_coords(const RealVector& coords, std::span<const Matrix> basis);

namespace kets {
KetVector zero();
KetVector one();
KetVector plus();
KetVector minus();
KetVector plus_i();
KetVector minus_i();
/// (|01> - |10>)/sqrt(2)
KetVector singlet();
}  // namespace kets

}  // namespace nlbox
