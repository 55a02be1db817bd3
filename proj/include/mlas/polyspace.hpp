#pragma once

// Normalized probabilists' Hermite polynomials, their tensor products, and
// downward-closed multi-index sets describing polynomial spaces.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace mlas {

/// H_0(x), ..., H_nmax(x), orthonormal w.r.t. the standard Gaussian.
/// Throws std::invalid_argument for non-finite x.
std::vector<double> hermite_eval_all(unsigned nmax, double x);

/// Writes H_0(x), ..., H_{out.size()-1}(x) into `out` without allocating.
void hermite_eval_into(double x, std::span<double> out);

/// A degree multi-index with implicit trailing zeros.
///
/// Stored sparsely as (position, degree) pairs with degree > 0, sorted by
/// position, so indices living in a 100-dimensional ambient space cost
/// nothing for their zero entries. Positions are 0-based.
class MultiIndex {
public:
    using Entry = std::pair<std::uint32_t, std::uint32_t>;

    MultiIndex() = default;

    /// Builds from a dense degree vector; zeros are dropped.
    static MultiIndex from_dense(std::span<const unsigned> degrees);
    /// Builds from (position, degree) pairs in any order; zero degrees are dropped.
    /// Throws on duplicate positions.
    static MultiIndex from_entries(std::vector<Entry> entries);
    static MultiIndex unit(std::uint32_t position, std::uint32_t degree = 1);

    std::uint32_t operator[](std::uint32_t position) const;
    std::uint32_t total_degree() const;
    /// One past the last nonzero position; 0 for the zero index.
    std::uint32_t support_dim() const;
    bool is_zero() const { return entries_.empty(); }

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<unsigned> to_dense(std::size_t dim) const;

    MultiIndex incremented(std::uint32_t position) const;
    /// nullopt when the entry at `position` is already zero.
    std::optional<MultiIndex> decremented(std::uint32_t position) const;

    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<Entry> entries_;
};

/// Π_j H_{nu_j}(x_j). Throws std::invalid_argument if nu has support
/// beyond x.size().
double tensor_eval(const MultiIndex& nu, std::span<const double> x);

/// True iff every componentwise decrement of every member is also a member.
bool is_downward_closed(std::span<const MultiIndex> indices);

/// A downward-closed set of multi-indices supported on the first `dim`
/// coordinates. The order of `indices()` is the basis order used for
/// coefficient vectors; lookups go through `find`.
class MultiIndexSet {
public:
    MultiIndexSet() = default;
    /// Validates downward-closedness and support; throws std::invalid_argument.
    MultiIndexSet(std::size_t dim, std::vector<MultiIndex> indices);

    static MultiIndexSet zero(std::size_t dim);
    /// All indices in `dim` variables with total degree <= `degree`.
    static MultiIndexSet total_degree(std::size_t dim, unsigned degree);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }

    bool contains(const MultiIndex& nu) const { return lookup_.contains(nu); }
    std::optional<std::size_t> find(const MultiIndex& nu) const;

    /// Largest degree appearing in coordinate j (0 if none).
    unsigned max_degree(std::size_t j) const;

    /// Same indices viewed in `new_dim >= dim()` active variables.
    MultiIndexSet with_dim(std::size_t new_dim) const;
    /// Appends `extra` (in order, skipping members) and revalidates.
    MultiIndexSet with_added(std::span<const MultiIndex> extra) const;

    /// Σ_ν H_ν(x)² (the inverse Christoffel function times size()).
    double christoffel_sum(std::span<const double> x) const;
    /// Rows are points, columns follow the basis order.
    Eigen::MatrixXd basis_matrix(const Eigen::MatrixXd& points) const;
    /// Σ_i coeffs[i]·H_{ν_i}(x).
    double evaluate(std::span<const double> coeffs, std::span<const double> x) const;

private:
    std::size_t dim_ = 0;
    std::vector<MultiIndex> indices_;
    std::map<MultiIndex, std::size_t> lookup_;
    std::vector<unsigned> max_degree_;  // per coordinate
};

/// All ν ∉ S whose componentwise decrements all lie in S, restricted to the
/// first S.dim() coordinates, in ascending order.
std::vector<MultiIndex> reduced_margin(const MultiIndexSet& set);
/// Same, for a raw index list; throws std::invalid_argument unless it is
/// downward-closed and supported on the first `dim` coordinates.
std::vector<MultiIndex> reduced_margin(std::size_t dim, std::span<const MultiIndex> indices);

/// Number of indices of total degree <= degree in dim variables.
std::size_t total_degree_size(std::size_t dim, unsigned degree);

void to_json(nlohmann::json& j, const MultiIndex& nu);
void from_json(const nlohmann::json& j, MultiIndex& nu);
void to_json(nlohmann::json& j, const MultiIndexSet& set);
void from_json(const nlohmann::json& j, MultiIndexSet& set);

}  // namespace mlas
