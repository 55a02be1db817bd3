#pragma once

// Active-subspace linear algebra: gradient second-moment matrices, truncated
// spectral decompositions, subspace distances and the single-level pipeline.

#include <cstddef>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlas/hierarchy.hpp"
#include "mlas/sampling.hpp"

namespace mlas {

/// Top eigenpairs of a gradient second-moment matrix.
///
/// `spectrum` holds every eigenvalue that was computed (nonincreasing,
/// clamped at zero); eigenvalues not listed are exactly zero.
struct SpectralDecomposition {
    Eigen::MatrixXd eigvecs;   // d × k, orthonormal columns
    Eigen::VectorXd eigvals;   // k leading eigenvalues σ̂²_1 ≥ … ≥ σ̂²_k
    Eigen::VectorXd spectrum;  // all eigenvalues, nonincreasing

    std::size_t rank() const { return static_cast<std::size_t>(eigvecs.cols()); }
    double trace() const { return spectrum.sum(); }
    /// Σ_{j>r} σ̂²_j.
    double tail(std::size_t r) const;
};

/// A column-orthonormal d × r basis with the retained singular values σ̂_j.
struct Subspace {
    Eigen::MatrixXd basis;
    Eigen::VectorXd singular_values;

    std::size_t rank() const { return static_cast<std::size_t>(basis.cols()); }
    std::size_t ambient_dim() const { return static_cast<std::size_t>(basis.rows()); }

    static Subspace from_decomposition(const SpectralDecomposition& dec);
    /// Checks column orthonormality to `tol`; throws std::invalid_argument.
    static Subspace from_basis(Eigen::MatrixXd basis, Eigen::VectorXd singular_values = {}, double tol = 1e-10);
    /// First r columns of the d × d identity.
    static Subspace coordinate(std::size_t d, std::size_t r);

    /// Leading `r` columns.
    Subspace leading(std::size_t r) const;
};

/// (1/M) Σ g_i g_iᵀ for the gradients in the rows of `grads`.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& grads);

/// Top-r eigenpairs of a symmetric PSD matrix. Throws std::invalid_argument
/// when C is not symmetric to 1e-10 (relative to its largest entry) or r > d.
SpectralDecomposition truncated_eig(const Eigen::MatrixXd& cov, std::size_t r);

/// Same decomposition computed straight from gradient rows; uses the M × M
/// snapshot matrix when M < d. Missing directions (rank-deficient data)
/// are filled with an orthonormal completion and zero eigenvalues.
SpectralDecomposition gradient_decomposition(const Eigen::MatrixXd& grads, std::size_t r);

/// ‖Π_U − Π_V‖₂ ∈ [0, 1].
double projector_distance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v);
double projector_distance(const Subspace& u, const Subspace& v);

/// Orthonormal basis of the complement of span(U), d × (d − r).
Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& u);

/// Makes the first entry above 1e-12 in magnitude of every column positive.
void normalize_signs(Eigen::MatrixXd& vectors);

/// Single-level active subspace: M Gaussian draws, gradients of f_l (or Δ_l),
/// top-r eigenvectors of the sample covariance. The M evaluations are
/// charged to `ledger` when given.
SpectralDecomposition slas_decomposition(const ModelHierarchy& hier, int level, std::size_t r, std::size_t m,
                                         const SeededStream& stream, WorkLedger* ledger = nullptr,
                                         Target target = Target::Function);
Subspace slas_subspace(const ModelHierarchy& hier, int level, std::size_t r, std::size_t m,
                       const SeededStream& stream, WorkLedger* ledger = nullptr,
                       Target target = Target::Function);

void to_json(nlohmann::json& j, const Subspace& s);
void from_json(const nlohmann::json& j, Subspace& s);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace mlas
