#include "nlbox/witness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "nlbox/errors.hpp"

namespace nlbox {

// --- StatsTable ----------------------------------------------------------------------

StatsTable::StatsTable(std::vector<LabeledInput> preparations,
                       std::vector<LabeledMeasurement> measurements,
                       std::vector<std::vector<std::vector<double>>> probabilities,
                       std::optional<std::vector<std::vector<std::uint64_t>>> sample_counts)
    : preparations_(std::move(preparations)),
      measurements_(std::move(measurements)),
      probabilities_(std::move(probabilities)),
      sample_counts_(std::move(sample_counts)) {
    if (preparations_.empty() || measurements_.empty()) {
        throw ValidationError("StatsTable: needs at least one preparation and one measurement");
    }
    std::set<std::string> seen;
    for (const auto& p : preparations_) {
        if (!seen.insert(p.label).second) {
            throw ValidationError("StatsTable: duplicate preparation label '" + p.label + "'");
        }
        if (p.density.dim() != dim_in()) throw ShapeError("StatsTable: input dims differ");
    }
    seen.clear();
    for (const auto& m : measurements_) {
        if (!seen.insert(m.label).second) {
            throw ValidationError("StatsTable: duplicate measurement label '" + m.label + "'");
        }
        if (m.povm.dim() != dim_out()) throw ShapeError("StatsTable: measurement dims differ");
    }
    if (probabilities_.size() != preparations_.size()) {
        throw ShapeError("StatsTable: probability rows do not match preparations");
    }
    if (sample_counts_ && sample_counts_->size() != preparations_.size()) {
        throw ShapeError("StatsTable: sample counts do not match preparations");
    }
    for (std::size_t p = 0; p < preparations_.size(); ++p) {
        if (probabilities_[p].size() != measurements_.size() ||
            (sample_counts_ && (*sample_counts_)[p].size() != measurements_.size())) {
            throw ShapeError("StatsTable: row for '" + preparations_[p].label + "' has wrong width");
        }
        for (std::size_t m = 0; m < measurements_.size(); ++m) {
            const auto& row = probabilities_[p][m];
            if (row.size() != measurements_[m].povm.size()) {
                throw ShapeError("StatsTable: outcome count mismatch at (" + preparations_[p].label +
                                 ", " + measurements_[m].label + ")");
            }
            double total = 0.0;
            for (double v : row) {
                if (!(v >= 0.0 && v <= 1.0)) {
                    throw ValidationError("StatsTable: probability outside [0,1] at (" +
                                          preparations_[p].label + ", " + measurements_[m].label + ")");
                }
                total += v;
            }
            if (sample_counts_) {
                const auto n = (*sample_counts_)[p][m];
                if (n == 0) throw ValidationError("StatsTable: zero sample count");
                for (double v : row) {
                    const double c = v * static_cast<double>(n);
                    if (std::abs(c - std::round(c)) > 1e-6) {
                        throw ValidationError("StatsTable: frequency is not a count / N at (" +
                                              preparations_[p].label + ", " +
                                              measurements_[m].label + ")");
                    }
                }
            }
            if (std::abs(total - 1.0) > tol::kValid) {
                throw ValidationError("StatsTable: row (" + preparations_[p].label + ", " +
                                      measurements_[m].label + ") sums to " + std::to_string(total));
            }
        }
    }
}

bool operator==(const StatsTable& a, const StatsTable& b) {
    if (a.preparations_.size() != b.preparations_.size() ||
        a.measurements_.size() != b.measurements_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.preparations_.size(); ++i) {
        if (a.preparations_[i].label != b.preparations_[i].label ||
            a.preparations_[i].density.matrix() != b.preparations_[i].density.matrix()) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.measurements_.size(); ++i) {
        const auto& ea = a.measurements_[i].povm.effects();
        const auto& eb = b.measurements_[i].povm.effects();
        if (a.measurements_[i].label != b.measurements_[i].label || ea.size() != eb.size()) return false;
        for (std::size_t k = 0; k < ea.size(); ++k) {
            if (ea[k] != eb[k]) return false;
        }
    }
    return a.probabilities_ == b.probabilities_ && a.sample_counts_ == b.sample_counts_;
}

namespace {

std::vector<std::vector<double>> measure_all(const DensityOperator& out,
                                             const std::vector<LabeledMeasurement>& measurements) {
    std::vector<std::vector<double>> row;
    row.reserve(measurements.size());
    for (const auto& m : measurements) {
        auto p = born_probabilities(out, m.povm);
        double total = 0.0;
        for (double v : p) total += v;
        for (double& v : p) v = std::min(1.0, v / total);
        row.push_back(std::move(p));
    }
    return row;
}

}  // namespace

StatsTable tabulate_channel(const Channel& channel, const std::vector<LabeledInput>& inputs,
                            const std::vector<LabeledMeasurement>& measurements) {
    std::vector<std::vector<std::vector<double>>> probs;
    probs.reserve(inputs.size());
    for (const auto& in : inputs) probs.push_back(measure_all(channel.apply(in.density), measurements));
    return StatsTable(inputs, measurements, std::move(probs));
}

StatsTable tabulate_box(const NonlinearBox& box, const std::vector<Preparation>& preparations,
                        const std::vector<LabeledMeasurement>& measurements) {
    std::vector<LabeledInput> inputs;
    std::vector<std::vector<std::vector<double>>> probs;
    for (const auto& p : preparations) {
        inputs.push_back({p.label(), p.effective_density()});
        probs.push_back(measure_all(apply_box(box, p), measurements));
    }
    return StatsTable(std::move(inputs), measurements, std::move(probs));
}

std::vector<LabeledInput> pauli_eigenstates() {
    return {
        {"z+", DensityOperator::pure(kets::zero())},   {"z-", DensityOperator::pure(kets::one())},
        {"x+", DensityOperator::pure(kets::plus())},   {"x-", DensityOperator::pure(kets::minus())},
        {"y+", DensityOperator::pure(kets::plus_i())}, {"y-", DensityOperator::pure(kets::minus_i())},
    };
}

std::vector<LabeledMeasurement> pauli_measurements(std::size_t qubits) {
    const std::array<std::array<KetVector, 2>, 3> bases{{
        {kets::plus(), kets::minus()},
        {kets::plus_i(), kets::minus_i()},
        {kets::zero(), kets::one()},
    }};
    const char names[3] = {'X', 'Y', 'Z'};
    std::size_t count = 1;
    for (std::size_t q = 0; q < qubits; ++q) count *= 3;

    std::vector<LabeledMeasurement> out;
    for (std::size_t code = 0; code < count; ++code) {
        std::string label;
        std::vector<Matrix> effects{Matrix::Ones(1, 1)};
        std::size_t rem = code;
        std::vector<std::size_t> choice(qubits);
        for (std::size_t q = qubits; q-- > 0;) {
            choice[q] = rem % 3;
            rem /= 3;
        }
        for (std::size_t q = 0; q < qubits; ++q) {
            label += names[choice[q]];
            std::vector<Matrix> next;
            for (const auto& e : effects) {
                for (const auto& ket : bases[choice[q]]) {
                    next.push_back(kron(e, ket.amplitudes() * ket.amplitudes().adjoint()));
                }
            }
            effects = std::move(next);
        }
        out.push_back({label, Povm(std::move(effects))});
    }
    return out;
}

// --- fitting --------------------------------------------------------------------------

Matrix LinearFit::apply(const Matrix& x) const {
    const auto di = static_cast<Eigen::Index>(dim_in);
    const auto dout = static_cast<Eigen::Index>(dim_out);
    if (x.rows() != di || x.cols() != di) throw ShapeError("LinearFit::apply: wrong input shape");
    const Vector v = Eigen::Map<const Vector>(x.data(), di * di);
    const Vector y = map * v;
    return Eigen::Map<const Matrix>(y.data(), dout, dout);
}

LinearFit fit_linear_map(const StatsTable& t) {
    const std::size_t din = t.dim_in();
    const std::size_t dout = t.dim_out();
    const auto in_basis = hermitian_basis(din);
    const auto out_basis = hermitian_basis(dout);
    const auto nin = static_cast<Eigen::Index>(in_basis.size());
    const auto nout = static_cast<Eigen::Index>(out_basis.size());

    // Tomographic completeness of the inputs.
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(t.preparations().size()), nin);
    for (std::size_t p = 0; p < t.preparations().size(); ++p) {
        inputs.row(static_cast<Eigen::Index>(p)) =
            hermitian_coords(t.preparations()[p].density.matrix(), in_basis).transpose();
    }
    {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(inputs);
        const auto& s = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-8 ? 1 : 0;
        if (rank < nin) {
            throw RankError("fit_linear_map: input densities span " + std::to_string(rank) +
                            " of the " + std::to_string(nin) +
                            " Hermitian directions needed (tomographically incomplete)");
        }
    }

    // Unknowns: transfer coefficients T(a, b) for traceless output directions
    // a >= 1. Trace preservation fixes row a = 0 to sqrt(din/dout) e_0.
    const double t00 = std::sqrt(static_cast<double>(din) / static_cast<double>(dout));
    struct Cell {
        std::size_t p, m, k;
    };
    std::vector<Cell> cells;
    for (std::size_t p = 0; p < t.preparations().size(); ++p) {
        for (std::size_t m = 0; m < t.measurements().size(); ++m) {
            for (std::size_t k = 0; k < t.measurements()[m].povm.size(); ++k) cells.push_back({p, m, k});
        }
    }
    std::vector<std::vector<RealVector>> effect_coords(t.measurements().size());
    for (std::size_t m = 0; m < t.measurements().size(); ++m) {
        for (const auto& e : t.measurements()[m].povm.effects()) {
            effect_coords[m].push_back(hermitian_coords(e, out_basis));
        }
    }

    const auto unknowns = (nout - 1) * nin;
    Eigen::MatrixXd design(static_cast<Eigen::Index>(cells.size()), unknowns);
    RealVector rhs(static_cast<Eigen::Index>(cells.size()));
    RealVector known(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& [p, m, k] = cells[c];
        const RealVector& e = effect_coords[m][k];
        const auto r = inputs.row(static_cast<Eigen::Index>(p));
        const auto row = static_cast<Eigen::Index>(c);
        for (Eigen::Index a = 1; a < nout; ++a) {
            for (Eigen::Index b = 0; b < nin; ++b) {
                design(row, (a - 1) * nin + b) = e(a) * r(b);
            }
        }
        known(row) = e(0) * t00 * r(0);
        rhs(row) = t.probabilities()[p][m][k] - known(row);
    }
    const RealVector solution = design.completeOrthogonalDecomposition().solve(rhs);

    Eigen::MatrixXd transfer = Eigen::MatrixXd::Zero(nout, nin);
    transfer(0, 0) = t00;
    for (Eigen::Index a = 1; a < nout; ++a) {
        for (Eigen::Index b = 0; b < nin; ++b) transfer(a, b) = solution((a - 1) * nin + b);
    }

    LinearFit fit;
    fit.dim_in = din;
    fit.dim_out = dout;
    const RealVector predicted = design * solution + known;
    // Total-variation distance per (preparation, measurement) row.
    std::vector<std::vector<double>> row_tv(t.preparations().size(),
                                            std::vector<double>(t.measurements().size(), 0.0));
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& [p, m, k] = cells[c];
        row_tv[p][m] += 0.5 * std::abs(predicted(static_cast<Eigen::Index>(c)) - t.probabilities()[p][m][k]);
    }
    fit.residual = 0.0;
    for (const auto& row : row_tv) {
        for (double tv : row) fit.residual = std::max(fit.residual, tv);
    }

    // S = sum_ab T(a,b) vec(G_a) vec(G_b)^dag
    fit.map = Matrix::Zero(nout, nin);
    for (Eigen::Index a = 0; a < nout; ++a) {
        const auto& ga = out_basis[static_cast<std::size_t>(a)];
        const Vector va = Eigen::Map<const Vector>(ga.data(), ga.size());
        for (Eigen::Index b = 0; b < nin; ++b) {
            if (transfer(a, b) == 0.0) continue;
            const auto& gb = in_basis[static_cast<std::size_t>(b)];
            const Vector vb = Eigen::Map<const Vector>(gb.data(), gb.size());
            fit.map += transfer(a, b) * va * vb.adjoint();
        }
    }

    // Choi matrix J = sum_ij |i><j| (x) L(|i><j|)
    const auto di = static_cast<Eigen::Index>(din);
    const auto dd = static_cast<Eigen::Index>(dout);
    Matrix choi = Matrix::Zero(di * dd, di * dd);
    for (Eigen::Index i = 0; i < di; ++i) {
        for (Eigen::Index j = 0; j < di; ++j) {
            Matrix unit = Matrix::Zero(di, di);
            unit(i, j) = 1.0;
            choi.block(i * dd, j * dd, dd, dd) = fit.apply(unit);
        }
    }
    const auto choi_eig = eigh(0.5 * (choi + choi.adjoint()));
    fit.choi_min_eig = choi_eig.values.minCoeff();

    if (t.sampled()) {
        // Sampling noise of the Choi matrix on the eigenspace of eigenvalues
        // that are plausibly zero,
        // propagated through the least-squares solve to first order. The
        // smallest eigenvalue moves by at most the Frobenius norm of that
        // block; its RMS is the reported scale.
        const Eigen::MatrixXd pinv_t = design.completeOrthogonalDecomposition().pseudoInverse().transpose();
        const auto& counts = *t.sample_counts();
        const auto variance = [&](const RealVector& h) {
            const RealVector g = pinv_t * h;
            double var = 0.0;
            std::size_t c = 0;
            for (std::size_t p = 0; p < t.preparations().size(); ++p) {
                for (std::size_t m = 0; m < t.measurements().size(); ++m) {
                    const auto& row = t.probabilities()[p][m];
                    double first = 0.0, second = 0.0;
                    for (std::size_t k = 0; k < row.size(); ++k, ++c) {
                        const double gk = g(static_cast<Eigen::Index>(c));
                        first += gk * row[k];
                        second += gk * gk * row[k];
                    }
                    var += std::max(second - first * first, 0.0) / static_cast<double>(counts[p][m]);
                }
            }
            return var;
        };
        // Gradients of <e_i| J |e_j> with respect to T(a, b): the Choi matrix of
        // X -> G_a Tr(G_b X) is G_b^T (x) G_a.
        std::vector<Matrix> jab;
        for (Eigen::Index a = 1; a < nout; ++a) {
            for (Eigen::Index b = 0; b < nin; ++b) {
                jab.push_back(kron(in_basis[static_cast<std::size_t>(b)].transpose(),
                                   out_basis[static_cast<std::size_t>(a)]));
            }
        }
        const auto element_variance = [&](Eigen::Index i, Eigen::Index j) {
            const Vector ei = choi_eig.vectors.col(i);
            const Vector ej = choi_eig.vectors.col(j);
            RealVector re(unknowns), im(unknowns);
            for (Eigen::Index u = 0; u < unknowns; ++u) {
                const Complex z = ei.dot(jab[static_cast<std::size_t>(u)] * ej);
                re(u) = z.real();
                im(u) = z.imag();
            }
            return variance(re) + (i == j ? 0.0 : variance(im));
        };
        const Eigen::Index n = choi_eig.values.size();
        double widest = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) widest = std::max(widest, std::sqrt(element_variance(i, i)));
        std::vector<Eigen::Index> block;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == 0 || choi_eig.values(i) <= 3.0 * widest) block.push_back(i);
        }
        double frobenius = 0.0;
        for (auto i : block) {
            for (auto j : block) frobenius += element_variance(i, j);
        }
        fit.choi_min_eig_sigma = std::sqrt(frobenius);
    }
    return fit;
}

double default_linearity_tolerance(const StatsTable& t) {
    if (!t.sampled()) return tol::kEqual;
    double worst = 0.0;
    const auto& counts = *t.sample_counts();
    for (std::size_t p = 0; p < t.preparations().size(); ++p) {
        for (std::size_t m = 0; m < t.measurements().size(); ++m) {
            const auto n = static_cast<double>(counts[p][m]);
            for (double v : t.probabilities()[p][m]) {
                worst = std::max(worst, std::sqrt(v * (1.0 - v) / n));
            }
        }
    }
    return 3.0 * worst;
}

bool is_linear_explainable(const StatsTable& t, std::optional<double> tol) {
    const double threshold = tol.value_or(default_linearity_tolerance(t));
    const LinearFit fit = fit_linear_map(t);
    const double cp_threshold = tol ? *tol : std::max(threshold, 3.0 * fit.choi_min_eig_sigma);
    return fit.residual <= threshold && fit.choi_min_eig >= -cp_threshold;
}

double affinity_violation(const NonlinearBox& box, const std::pair<Preparation, Preparation>& pair) {
    const auto& [a, b] = pair;
    if (!linearly_equivalent(a, b)) {
        throw MisuseError("affinity_violation: '" + a.label() + "' and '" + b.label() +
                          "' are not linearly equivalent");
    }
    if (!classify_membership(a, box.membership()) || !classify_membership(b, box.membership())) {
        throw MisuseError("affinity_violation: both preparations must belong to the verifying set");
    }
    return trace_distance(apply_box(box, a), apply_box(box, b));
}

// --- text format -----------------------------------------------------------------------

namespace {

void write_matrix(std::ostream& os, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << m(i, j).real() << ' ' << m(i, j).imag();
    }
}

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    bool next() {
        std::string line;
        while (std::getline(is_, line)) {
            ++number_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            tokens_.clear();
            std::istringstream ls(line);
            for (std::string tok; ls >> tok;) tokens_.push_back(tok);
            pos_ = 0;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("stats line " + std::to_string(number_) + ": " + what);
    }

    const std::string& word() {
        if (pos_ >= tokens_.size()) fail("unexpected end of record");
        return tokens_[pos_++];
    }

    double real() {
        const std::string& w = word();
        try {
            std::size_t used = 0;
            const double v = std::stod(w, &used);
            if (used != w.size()) fail("bad number '" + w + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad number '" + w + "'");
        }
    }

    std::uint64_t count() {
        const std::string& w = word();
        if (w.empty() || w.find_first_not_of("0123456789") != std::string::npos) {
            fail("bad count '" + w + "'");
        }
        return std::stoull(w);
    }

    Matrix matrix(std::size_t d) {
        const auto n = static_cast<Eigen::Index>(d);
        Matrix m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double re = real();
                const double im = real();
                m(i, j) = Complex(re, im);
            }
        }
        return m;
    }

    void finish() const {
        if (pos_ != tokens_.size()) fail("trailing tokens");
    }

private:
    std::istream& is_;
    std::vector<std::string> tokens_;
    std::size_t pos_ = 0;
    std::size_t number_ = 0;
};

}  // namespace

void write_stats(std::ostream& os, const StatsTable& t) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << std::setprecision(17);
    os << "nlbox-stats 1\n";
    os << "mode " << (t.sampled() ? "sampled" : "exact") << '\n';
    os << "dims " << t.dim_in() << ' ' << t.dim_out() << '\n';
    for (const auto& p : t.preparations()) {
        os << "prep " << p.label;
        write_matrix(os, p.density.matrix());
        os << '\n';
    }
    for (const auto& m : t.measurements()) {
        os << "meas " << m.label << ' ' << m.povm.size() << '\n';
        for (std::size_t k = 0; k < m.povm.size(); ++k) {
            os << "effect " << m.label << ' ' << k;
            write_matrix(os, m.povm.effect(k));
            os << '\n';
        }
    }
    for (std::size_t p = 0; p < t.preparations().size(); ++p) {
        for (std::size_t m = 0; m < t.measurements().size(); ++m) {
            os << "row " << t.preparations()[p].label << ' ' << t.measurements()[m].label << ' '
               << (t.sampled() ? (*t.sample_counts())[p][m] : 0);
            for (double v : t.probabilities()[p][m]) os << ' ' << v;
            os << '\n';
        }
    }
    os.flags(flags);
    os.precision(precision);
}

StatsTable read_stats(std::istream& is) {
    LineReader in(is);
    if (!in.next() || in.word() != "nlbox-stats" || in.word() != "1") {
        in.fail("expected header 'nlbox-stats 1'");
    }
    in.finish();

    std::optional<bool> sampled;
    std::size_t din = 0, dout = 0;
    std::vector<LabeledInput> preps;
    std::map<std::string, std::size_t> prep_index, meas_index;
    std::vector<std::string> meas_labels;
    std::vector<std::vector<Matrix>> effects;
    std::vector<std::size_t> outcome_counts;
    struct Row {
        std::size_t p, m;
        std::uint64_t n;
        std::vector<double> probs;
    };
    std::vector<Row> rows;

    while (in.next()) {
        const std::string kind = in.word();
        if (kind == "mode") {
            const std::string mode = in.word();
            if (mode != "exact" && mode != "sampled") in.fail("mode must be exact or sampled");
            sampled = mode == "sampled";
        } else if (kind == "dims") {
            din = static_cast<std::size_t>(in.count());
            dout = static_cast<std::size_t>(in.count());
            if (din == 0 || dout == 0) in.fail("dimensions must be positive");
        } else if (kind == "prep") {
            if (din == 0) in.fail("'dims' must precede 'prep'");
            std::string label = in.word();
            Matrix m = in.matrix(din);
            if (prep_index.contains(label)) in.fail("duplicate preparation '" + label + "'");
            prep_index[label] = preps.size();
            try {
                preps.push_back({label, DensityOperator(std::move(m))});
            } catch (const ValidationError& e) {
                in.fail("preparation '" + label + "': " + e.what());
            }
        } else if (kind == "meas") {
            std::string label = in.word();
            const auto outcomes = static_cast<std::size_t>(in.count());
            if (meas_index.contains(label)) in.fail("duplicate measurement '" + label + "'");
            meas_index[label] = meas_labels.size();
            meas_labels.push_back(label);
            outcome_counts.push_back(outcomes);
            effects.emplace_back(outcomes);
        } else if (kind == "effect") {
            if (dout == 0) in.fail("'dims' must precede 'effect'");
            const std::string label = in.word();
            const auto it = meas_index.find(label);
            if (it == meas_index.end()) in.fail("unknown measurement '" + label + "'");
            const auto k = static_cast<std::size_t>(in.count());
            if (k >= outcome_counts[it->second]) in.fail("outcome index out of range");
            effects[it->second][k] = in.matrix(dout);
        } else if (kind == "row") {
            const std::string pl = in.word();
            const std::string ml = in.word();
            const auto pit = prep_index.find(pl);
            const auto mit = meas_index.find(ml);
            if (pit == prep_index.end()) in.fail("unknown preparation '" + pl + "'");
            if (mit == meas_index.end()) in.fail("unknown measurement '" + ml + "'");
            Row row{pit->second, mit->second, in.count(), {}};
            for (std::size_t k = 0; k < outcome_counts[mit->second]; ++k) row.probs.push_back(in.real());
            rows.push_back(std::move(row));
        } else {
            in.fail("unknown record '" + kind + "'");
        }
        in.finish();
    }
    if (!sampled) throw ParseError("stats: missing 'mode' record");
    if (preps.empty() || meas_labels.empty()) throw ParseError("stats: no preparations or measurements");

    std::vector<LabeledMeasurement> measurements;
    for (std::size_t m = 0; m < meas_labels.size(); ++m) {
        for (std::size_t k = 0; k < effects[m].size(); ++k) {
            if (effects[m][k].size() == 0) {
                throw ParseError("stats: measurement '" + meas_labels[m] + "' is missing effect " +
                                 std::to_string(k));
            }
        }
        measurements.push_back({meas_labels[m], Povm(effects[m])});
    }
    std::vector<std::vector<std::vector<double>>> probs(
        preps.size(), std::vector<std::vector<double>>(meas_labels.size()));
    std::vector<std::vector<std::uint64_t>> counts(preps.size(),
                                                   std::vector<std::uint64_t>(meas_labels.size(), 0));
    std::vector<std::vector<bool>> filled(preps.size(), std::vector<bool>(meas_labels.size(), false));
    for (auto& row : rows) {
        if (filled[row.p][row.m]) {
            throw ParseError("stats: duplicate row for (" + preps[row.p].label + ", " +
                             meas_labels[row.m] + ")");
        }
        filled[row.p][row.m] = true;
        probs[row.p][row.m] = std::move(row.probs);
        counts[row.p][row.m] = row.n;
    }
    for (std::size_t p = 0; p < preps.size(); ++p) {
        for (std::size_t m = 0; m < meas_labels.size(); ++m) {
            if (!filled[p][m]) {
                throw ParseError("stats: missing row for (" + preps[p].label + ", " + meas_labels[m] + ")");
            }
        }
    }
    if (*sampled) return StatsTable(std::move(preps), std::move(measurements), std::move(probs), std::move(counts));
    return StatsTable(std::move(preps), std::move(measurements), std::move(probs));
}

void save_stats(const std::string& path, const StatsTable& t) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_stats(os, t);
    if (!os) throw IoError("write to '" + path + "' failed");
}

StatsTable load_stats(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    return read_stats(is);
}

}  // namespace nlbox
