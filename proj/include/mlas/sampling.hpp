#pragma once

// Gaussian reference draws and draws from the optimal weighted least-squares
// measure dν* = (1/m) Σ_ν H_ν² dμ, with the matching weights w = dμ/dν*.

#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "mlas/polyspace.hpp"

namespace mlas {

using Engine = std::mt19937_64;

/// A reproducible random stream identified by (seed, id).
///
/// Identical (seed, id) pairs yield identical draws; distinct ids are
/// decorrelated by hashing both words through splitmix64 before seeding.
struct SeededStream {
    std::uint64_t seed = 0;
    std::uint64_t id = 0;

    Engine engine() const;
    /// Derived stream for sub-task `k`; children of distinct parents or
    /// distinct k do not collide in practice.
    SeededStream child(std::uint64_t k) const;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Points in the rows of `points`, weights w(x) = m / Σ_ν H_ν(x)².
struct WeightedSamples {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

/// n i.i.d. standard normal vectors in R^dim, one per row.
Eigen::MatrixXd draw_gaussian(std::size_t dim, const SeededStream& stream, std::size_t n);
/// Same, pulling from an engine the caller owns.
Eigen::MatrixXd draw_gaussian(std::size_t dim, Engine& engine, std::size_t n);

/// m / Σ_{ν∈Ξ} H_ν(x)². Throws std::invalid_argument for an empty set.
double optimal_weight(const MultiIndexSet& set, std::span<const double> x);

/// n i.i.d. draws from ν*_Ξ in Ξ.dim() variables with their weights.
WeightedSamples draw_optimal(const MultiIndexSet& set, const SeededStream& stream, std::size_t n);

/// One draw from the product density Π_j H_{ν_j}(t_j)² φ(t_j) in `dim` variables.
Eigen::VectorXd draw_component(const MultiIndex& nu, std::size_t dim, Engine& engine);

/// CDF of the univariate density H_n(t)² φ(t), in closed form:
/// Φ(x) − φ(x) Σ_{k=1}^{n} H_{k−1}(x) H_k(x) / √k.
double hermite_squared_cdf(unsigned n, double x);
/// Inverse of `hermite_squared_cdf` on the truncation interval [−R_n, R_n],
/// R_n = √(2(2n+1)) + 6.
double hermite_squared_quantile(unsigned n, double u);
double hermite_squared_truncation(unsigned n);

}  // namespace mlas
