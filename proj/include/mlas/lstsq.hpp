#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

#include "mlas/polyspace.hpp"
#include "mlas/sampling.hpp"

namespace mlas {

/// Raised when the empirical Gram matrix is too far from the identity for
/// the weighted least-squares estimator to be trusted.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double gram_deviation)
        : std::runtime_error(what), gram_deviation_(gram_deviation) {}
    double gram_deviation() const { return gram_deviation_; }

private:
    double gram_deviation_;
};

/// Result of a weighted least-squares projection onto span{H_ν : ν ∈ Ξ}.
/// Column q of `coefficients` (and entry q of `residuals`) belongs to
/// right-hand side q.
struct LsFit {
    Eigen::MatrixXd coefficients;
    Eigen::VectorXd residuals;  // sqrt((1/N) Σ w_i (v(x_i) - value_i)²)
    double gram_deviation = 0.0;  // ‖G − I‖₂
    std::size_t n_samples = 0;

    Eigen::VectorXd coeffs() const { return coefficients.col(0); }
    double residual() const { return residuals[0]; }
};

/// Smallest N >= 2 with m <= κ N / log N, κ = (1 − log 2) / (2 + 2t).
std::size_t required_samples(std::size_t m, double t);

/// Weighted least squares via the normal equations G c = J.
///
/// `values` has one row per sample and one column per right-hand side.
/// Throws ConditioningError when G is singular or ‖G − I‖₂ >= 1, and
/// std::invalid_argument for size mismatches or non-positive weights.
LsFit fit(const MultiIndexSet& set, const WeightedSamples& samples, const Eigen::MatrixXd& values);
LsFit fit(const MultiIndexSet& set, const WeightedSamples& samples, const Eigen::VectorXd& values);

/// Empirical Gram matrix (1/N) Σ w_i φ(x_i) φ(x_i)ᵀ.
Eigen::MatrixXd gram_matrix(const MultiIndexSet& set, const WeightedSamples& samples);

/// ‖G − I‖₂ for symmetric G.
double gram_deviation(const Eigen::MatrixXd& gram);

/// Conditioning threshold and redraw budget used by the fitting pipelines.
struct ConditioningPolicy {
    double max_deviation = 0.5;
    int max_retries = 3;
};

}  // namespace mlas
