#include "mlas/asm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlas {

double SpectralDecomposition::tail(std::size_t r) const {
    double s = 0.0;
    for (Eigen::Index j = static_cast<Eigen::Index>(r); j < spectrum.size(); ++j) s += spectrum[j];
    return s;
}

Subspace Subspace::from_decomposition(const SpectralDecomposition& dec) {
    return Subspace{dec.eigvecs, dec.eigvals.cwiseMax(0.0).cwiseSqrt()};
}

Subspace Subspace::from_basis(Eigen::MatrixXd basis, Eigen::VectorXd singular_values, double tol) {
    const auto r = basis.cols();
    const double err = (basis.transpose() * basis - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
    if (r > 0 && !(err <= tol)) {
        throw std::invalid_argument("Subspace: basis is not column-orthonormal (error " + std::to_string(err) + ")");
    }
    if (singular_values.size() == 0) singular_values = Eigen::VectorXd::Zero(r);
    if (singular_values.size() != r) throw std::invalid_argument("Subspace: singular value count mismatch");
    return Subspace{std::move(basis), std::move(singular_values)};
}

Subspace Subspace::coordinate(std::size_t d, std::size_t r) {
    if (r > d) throw std::invalid_argument("Subspace::coordinate: r > d");
    const auto dd = static_cast<Eigen::Index>(d);
    const auto rr = static_cast<Eigen::Index>(r);
    return Subspace{Eigen::MatrixXd::Identity(dd, dd).leftCols(rr), Eigen::VectorXd::Zero(rr)};
}

Subspace Subspace::leading(std::size_t r) const {
    if (r > rank()) throw std::invalid_argument("Subspace::leading: r exceeds rank");
    const auto rr = static_cast<Eigen::Index>(r);
    return Subspace{basis.leftCols(rr), singular_values.head(rr)};
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& grads) {
    if (grads.rows() == 0) throw std::invalid_argument("sample_covariance: no gradients");
    if (!grads.allFinite()) throw std::invalid_argument("sample_covariance: non-finite gradient");
    const Eigen::MatrixXd c = (grads.transpose() * grads) / static_cast<double>(grads.rows());
    return 0.5 * (c + c.transpose());
}

void normalize_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            if (std::abs(vectors(i, c)) > 1e-12) {
                if (vectors(i, c) < 0.0) vectors.col(c) *= -1.0;
                break;
            }
        }
    }
}

namespace {

// Extends orthonormal columns `u` (d × k) to `r` orthonormal columns.
Eigen::MatrixXd complete_to(const Eigen::MatrixXd& u, Eigen::Index r) {
    const Eigen::Index d = u.rows();
    if (u.cols() >= r) return u.leftCols(r);
    Eigen::MatrixXd q;
    if (u.cols() == 0) {
        q = Eigen::MatrixXd::Identity(d, d);
    } else {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
        q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    }
    Eigen::MatrixXd out(d, r);
    out.leftCols(u.cols()) = u;
    out.rightCols(r - u.cols()) = q.middleCols(u.cols(), r - u.cols());
    return out;
}

// Re-orthonormalizes columns in order, preserving each column's direction.
void reorthonormalize(Eigen::MatrixXd& v) {
    if (v.cols() == 0) return;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
    const Eigen::MatrixXd r = qr.matrixQR().topRows(v.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        if (r(c, c) < 0.0) q.col(c) *= -1.0;
    }
    v = q;
}

SpectralDecomposition finish(const Eigen::MatrixXd& vecs, Eigen::VectorXd spectrum, Eigen::Index r) {
    SpectralDecomposition dec;
    spectrum = spectrum.cwiseMax(0.0);
    dec.eigvecs = complete_to(vecs, r);
    normalize_signs(dec.eigvecs);
    dec.eigvals = Eigen::VectorXd::Zero(r);
    const Eigen::Index known = std::min<Eigen::Index>(r, spectrum.size());
    dec.eigvals.head(known) = spectrum.head(known);
    dec.spectrum = std::move(spectrum);
    return dec;
}

}  // namespace

SpectralDecomposition truncated_eig(const Eigen::MatrixXd& cov, std::size_t r) {
    const Eigen::Index d = cov.rows();
    if (cov.cols() != d) throw std::invalid_argument("truncated_eig: matrix is not square");
    if (static_cast<Eigen::Index>(r) > d) throw std::invalid_argument("truncated_eig: rank exceeds dimension");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("truncated_eig: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("truncated_eig: eigensolver failed");
    const Eigen::VectorXd spectrum = eig.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();
    return finish(vecs.leftCols(static_cast<Eigen::Index>(r)), spectrum, static_cast<Eigen::Index>(r));
}

SpectralDecomposition gradient_decomposition(const Eigen::MatrixXd& grads, std::size_t r) {
    const Eigen::Index m = grads.rows();
    const Eigen::Index d = grads.cols();
    if (m == 0) throw std::invalid_argument("gradient_decomposition: no gradients");
    if (static_cast<Eigen::Index>(r) > d) throw std::invalid_argument("gradient_decomposition: rank exceeds dimension");
    if (m >= d) return truncated_eig(sample_covariance(grads), r);

    if (!grads.allFinite()) throw std::invalid_argument("gradient_decomposition: non-finite gradient");
    // Snapshot route: with A = grads/√M, AᵀA and AAᵀ share nonzero eigenvalues
    // and the eigenvectors map through u = Aᵀv/√λ.
    const Eigen::MatrixXd a = grads / std::sqrt(static_cast<double>(m));
    Eigen::MatrixXd k = a * a.transpose();
    k = 0.5 * (k + k.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    if (eig.info() != Eigen::Success) throw std::runtime_error("gradient_decomposition: eigensolver failed");
    const Eigen::VectorXd spectrum = eig.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXd v = eig.eigenvectors().rowwise().reverse();

    const double cutoff = std::max(spectrum[0], 0.0) * 1e-13;
    Eigen::Index usable = 0;
    while (usable < std::min<Eigen::Index>(m, static_cast<Eigen::Index>(r)) && spectrum[usable] > cutoff &&
           spectrum[usable] > 0.0) {
        ++usable;
    }
    Eigen::MatrixXd u(d, usable);
    for (Eigen::Index j = 0; j < usable; ++j) u.col(j) = a.transpose() * v.col(j) / std::sqrt(spectrum[j]);
    reorthonormalize(u);
    Eigen::VectorXd spec = spectrum;
    for (Eigen::Index j = usable; j < std::min<Eigen::Index>(m, static_cast<Eigen::Index>(r)); ++j) spec[j] = 0.0;
    return finish(u, spec, static_cast<Eigen::Index>(r));
}

double projector_distance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    if (u.rows() != v.rows()) throw std::invalid_argument("projector_distance: ambient dimensions differ");
    const Eigen::MatrixXd diff = u * u.transpose() - v * v.transpose();
    if (diff.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff, Eigen::EigenvaluesOnly);
    const double n = eig.eigenvalues().cwiseAbs().maxCoeff();
    return std::clamp(n, 0.0, 1.0);
}

double projector_distance(const Subspace& u, const Subspace& v) { return projector_distance(u.basis, v.basis); }

Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& u) {
    const Eigen::Index d = u.rows();
    const Eigen::Index r = u.cols();
    if (r == 0) return Eigen::MatrixXd::Identity(d, d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    return q.rightCols(d - r);
}

SpectralDecomposition slas_decomposition(const ModelHierarchy& hier, int level, std::size_t r, std::size_t m,
                                         const SeededStream& stream, WorkLedger* ledger, Target target) {
    if (m < 1) throw std::invalid_argument("slas: need at least one gradient sample");
    const Eigen::MatrixXd points = draw_gaussian(hier.dim(), stream, m);
    const Eigen::MatrixXd grads = gradient_batch(hier, level, target, points);
    if (ledger) ledger->charge_gradients(level, m, target_work(hier, level, target));
    return gradient_decomposition(grads, r);
}

Subspace slas_subspace(const ModelHierarchy& hier, int level, std::size_t r, std::size_t m,
                       const SeededStream& stream, WorkLedger* ledger, Target target) {
    return Subspace::from_decomposition(slas_decomposition(hier, level, r, m, stream, ledger, target));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw std::invalid_argument("matrix: data length does not match shape");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)];
    }
    return m;
}

void to_json(nlohmann::json& j, const Subspace& s) {
    j = {{"basis", matrix_to_json(s.basis)},
         {"singular_values", std::vector<double>(s.singular_values.data(), s.singular_values.data() + s.singular_values.size())}};
}

void from_json(const nlohmann::json& j, Subspace& s) {
    const auto sv = j.at("singular_values").get<std::vector<double>>();
    s = Subspace::from_basis(matrix_from_json(j.at("basis")),
                             Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size())));
}

}  // namespace mlas
