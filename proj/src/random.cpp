#include "nlbox/random.hpp"

#include <cmath>

#include "nlbox/errors.hpp"

namespace nlbox {

namespace {

Matrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = Complex(re, im);
        }
    }
    return g;
}

}  // namespace

Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

KetVector random_ket(std::size_t dim, Rng& rng) {
    Vector v = ginibre(static_cast<Eigen::Index>(dim), 1, rng).col(0);
    v.normalize();
    return KetVector(std::move(v));
}

DensityOperator random_density(std::size_t dim, std::size_t rank, Rng& rng) {
    if (rank == 0 || rank > dim) {
        throw ValidationError("random_density: rank must lie in [1, dim]");
    }
    const Matrix g = ginibre(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank), rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityOperator(std::move(rho));
}

Unitary random_unitary(std::size_t dim, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(dim);
    const Matrix g = ginibre(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex d = r(i, i);
        q.col(i) *= d / std::abs(d);
    }
    return Unitary(std::move(q));
}

Channel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t env_dim, Rng& rng) {
    // Stinespring: V = (U on out (x) env) restricted to inputs embedded in the
    // first dim_in basis vectors; K_e = (I (x) <e|) V.
    const std::size_t big = dim_out * env_dim;
    if (big < dim_in) {
        throw ValidationError("random_channel: dim_out * env_dim must be >= dim_in");
    }
    const Unitary u = random_unitary(big, rng);
    const Matrix v = u.matrix().leftCols(static_cast<Eigen::Index>(dim_in));
    std::vector<Matrix> kraus;
    kraus.reserve(env_dim);
    for (std::size_t e = 0; e < env_dim; ++e) {
        Matrix k(static_cast<Eigen::Index>(dim_out), static_cast<Eigen::Index>(dim_in));
        for (std::size_t o = 0; o < dim_out; ++o) {
            k.row(static_cast<Eigen::Index>(o)) = v.row(static_cast<Eigen::Index>(o * env_dim + e));
        }
        kraus.push_back(std::move(k));
    }
    return Channel(std::move(kraus));
}

}  // namespace nlbox
