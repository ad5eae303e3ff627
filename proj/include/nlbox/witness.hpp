#pragma once

// Decide from operational statistics p(k|P,M) whether some linear,
// trace-preserving map reproduces them. Rows are keyed by preparation label,
// so two distinct preparations may share one input density; that is where
// nonlinearity shows up.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlbox/boxes.hpp"
#include "nlbox/core.hpp"
#include "nlbox/preparations.hpp"

namespace nlbox {

struct LabeledInput {
    std::string label;
    DensityOperator density;
};

struct LabeledMeasurement {
    std::string label;
    Povm povm;
};

class StatsTable {
public:
    /// probabilities[p][m][k]. With `sample_counts[p][m]` the table is in
    /// sampled mode and each row must be counts / N exactly.
    StatsTable(std::vector<LabeledInput> preparations, std::vector<LabeledMeasurement> measurements,
               std::vector<std::vector<std::vector<double>>> probabilities,
               std::optional<std::vector<std::vector<std::uint64_t>>> sample_counts = std::nullopt);

    const std::vector<LabeledInput>& preparations() const noexcept { return preparations_; }
    const std::vector<LabeledMeasurement>& measurements() const noexcept { return measurements_; }
    const std::vector<std::vector<std::vector<double>>>& probabilities() const noexcept {
        return probabilities_;
    }
    const std::optional<std::vector<std::vector<std::uint64_t>>>& sample_counts() const noexcept {
        return sample_counts_;
    }
    bool sampled() const noexcept { return sample_counts_.has_value(); }
    std::size_t dim_in() const { return preparations_.front().density.dim(); }
    std::size_t dim_out() const { return measurements_.front().povm.dim(); }

    friend bool operator==(const StatsTable& a, const StatsTable& b);

private:
    std::vector<LabeledInput> preparations_;
    std::vector<LabeledMeasurement> measurements_;
    std::vector<std::vector<std::vector<double>>> probabilities_;
    std::optional<std::vector<std::vector<std::uint64_t>>> sample_counts_;
};

/// Exact table for a linear channel on labeled inputs.
StatsTable tabulate_channel(const Channel& channel, const std::vector<LabeledInput>& inputs,
                            const std::vector<LabeledMeasurement>& measurements);

/// Exact table for a box; each row's input density is the preparation's
/// effective density.
StatsTable tabulate_box(const NonlinearBox& box, const std::vector<Preparation>& preparations,
                        const std::vector<LabeledMeasurement>& measurements);

/// The six Pauli eigenstates labeled z+, z-, x+, x-, y+, y-.
std::vector<LabeledInput> pauli_eigenstates();
/// X, Y, Z projective measurements on each qubit of an n-qubit output
/// (3^n product measurements with 2^n outcomes each).
std::vector<LabeledMeasurement> pauli_measurements(std::size_t qubits);

struct LinearFit {
    std::size_t dim_in = 0;
    std::size_t dim_out = 0;
    /// Superoperator on column-stacked matrices: vec(L(X)) = map * vec(X).
    Matrix map;
    /// Max total-variation distance between predicted and observed outcome
    /// distributions over every (preparation, measurement) row.
    double residual = 0.0;
    /// Smallest eigenvalue of the fitted map's Choi matrix.
    double choi_min_eig = 0.0;
    /// Noise scale of choi_min_eig under multinomial sampling of the table:
    /// RMS Frobenius norm of the first-order Choi perturbation restricted to
    /// the eigenvectors whose eigenvalues are plausibly zero (0 for exact tables).
    double choi_min_eig_sigma = 0.0;

    Matrix apply(const Matrix& x) const;
};

/// Least-squares trace-preserving linear map; RankError when the input
/// densities do not span all d^2 Hermitian directions.
LinearFit fit_linear_map(const StatsTable& t);

/// 3 * max sqrt(p(1-p)/N) over all cells of a sampled table; 1e-8 for exact.
double default_linearity_tolerance(const StatsTable& t);

/// Residual <= tol and choi_min_eig >= -tol. Without an explicit tol the
/// residual uses default_linearity_tolerance and the positivity check uses
/// the larger of that and three standard errors of choi_min_eig.
bool is_linear_explainable(const StatsTable& t, std::optional<double> tol = std::nullopt);

/// Trace distance between the box outputs of two linearly equivalent member
/// preparations; MisuseError otherwise.
double affinity_violation(const NonlinearBox& box, const std::pair<Preparation, Preparation>& pair);

/// Text format, one record per line:
///   nlbox-stats 1
///   mode exact|sampled
///   dims <d_in> <d_out>
///   prep <label> <re im> x d_in^2          (row-major)
///   meas <label> <outcomes>
///   effect <meas-label> <k> <re im> x d_out^2
///   row <prep-label> <meas-label> <N> <p_0> ... <p_{K-1}>   (N = 0 in exact mode)
/// Blank lines and lines starting with '#' are ignored.
void write_stats(std::ostream& os, const StatsTable& t);
StatsTable read_stats(std::istream& is);
void save_stats(const std::string& path, const StatsTable& t);
StatsTable load_stats(const std::string& path);

}  // namespace nlbox
