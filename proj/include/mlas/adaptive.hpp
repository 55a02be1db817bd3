#pragma once

// Adaptive multilevel active subspaces (AMLASPA): a downward-closed set of
// (rank block k, level l) cells grown by gain/work profit, with adaptive
// Hermite approximation on each level's current subspace.

#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlas/asm.hpp"
#include "mlas/hierarchy.hpp"
#include "mlas/lstsq.hpp"
#include "mlas/mlas.hpp"
#include "mlas/polyspace.hpp"
#include "mlas/sampling.hpp"

namespace mlas {

struct CellIndex {
    std::size_t k = 0;  // rank block
    std::size_t l = 0;  // level

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

using CellSet = std::set<CellIndex>;
using RankSchedule = std::function<std::size_t(std::size_t)>;

/// Default r(k) = 2^k.
std::size_t rank_schedule(std::size_t k);

/// True iff every (k−1, l) and (k, l−1) of a member is a member.
bool is_downward_closed(const CellSet& cells);

/// A(k, l): {(k+1, l)}, plus (0, l_max+1) when (k, l) = (0, l_max), minus
/// cells already in I and cells whose (k, l−1) is not yet in I.
/// Throws std::invalid_argument when `cell` ∉ I.
std::vector<CellIndex> admissible_neighbors(const CellSet& cells, CellIndex cell);

/// Evaluated sample points kept for reuse, tagged with the mixture component
/// they were drawn from. Points are ambient (y-space) rows.
struct SamplePool {
    Eigen::MatrixXd points;
    Eigen::VectorXd values;
    std::vector<MultiIndex> tags;

    std::size_t size() const { return tags.size(); }
};

struct PolyapproxOptions {
    double unit_cost = 1.0;  // work per value evaluation
    double work_cap = std::numeric_limits<double>::infinity();
    double bulk_fraction = 0.5;  // margin indices with |c| >= fraction · max|c| are added
    std::size_t max_set_size = 200;  // cap on |S ∪ margin(S)|
    int max_rounds = 60;
    ConditioningPolicy policy{};
};

struct WarmStart {
    MultiIndexSet set;
    Eigen::VectorXd coeffs;
    SamplePool pool;
};

struct PolyapproxResult {
    MultiIndexSet set;
    Eigen::VectorXd coeffs;
    std::size_t evaluations = 0;  // new evaluations only
    double work = 0.0;
    double error_estimate = std::numeric_limits<double>::infinity();
    double residual = 0.0;
    double gram_deviation = 0.0;
    std::size_t fit_samples = 0;
    bool partial = false;    // work cap hit before tol
    bool converged = false;  // error estimate reached tol
    bool stalled = false;    // margin below tol, residual above: the rest is not polynomial in x
    int rounds = 0;
    SamplePool pool;
};

/// Values at the rows (ambient points) of the argument.
using BatchFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

/// Adaptive weighted least squares on span(V): each round fits on
/// T = S ∪ margin(S) with optimal sampling at the required sample size and
/// estimates the error of S as ‖c_margin‖ + residual; stops at `tol` or
/// when ‖c_margin‖ alone is below `tol`, otherwise adds the bulk of the margin. Pool samples whose tag is drawn
/// again are reused instead of re-evaluated.
PolyapproxResult polyapprox(const BatchFn& f, const Subspace& v, double tol, const WarmStart* warm, double t,
                            const SeededStream& stream, const PolyapproxOptions& opts = {});

struct AmlaspaOptions {
    double work_budget = 0.0;
    double c_m = 2.0;
    double t = 1.0;
    RankSchedule schedule = rank_schedule;
    /// Coordinate axes instead of eigenvectors; the multilevel polynomial
    /// baseline without subspace detection.
    bool identity_subspace = false;
    /// Highest level allowed; −1 means the hierarchy's max_level.
    int max_level = -1;
    double rotation_threshold = 0.1;
    double tolerance_floor = 1e-12;
    std::size_t max_iterations = 100000;
    PolyapproxOptions poly{};
};

struct CellRecord {
    CellIndex cell;
    std::size_t rank = 0;
    double gain = 0.0;
    double work = 0.0;
    std::size_t order = 0;  // exploration order
};

struct AdaptiveLevel {
    Eigen::MatrixXd grad_points;
    Eigen::MatrixXd grads;
    std::size_t top_ups = 0;
    Eigen::VectorXd spectrum;  // eigenvalues (or axis variances) in block order
    Eigen::MatrixXd directions;
    std::size_t k_max = 0;
    std::size_t rank = 0;
    double tail = 0.0;

    bool has_poly = false;
    Subspace subspace;
    MultiIndexSet set;
    Eigen::VectorXd coeffs;
    SamplePool pool;
    double poly_error = 0.0;
    double poly_residual = 0.0;
    double poly_gram_deviation = 0.0;
    bool poly_partial = false;

    double trace() const { return spectrum.sum(); }
};

struct AdaptiveState {
    std::size_t dim = 0;
    AmlaspaOptions options;
    std::map<CellIndex, CellRecord> cells;
    std::vector<AdaptiveLevel> levels;
    WorkLedger ledger;
    double work = 0.0;
    bool partial = false;

    CellSet index_set() const;
    /// Σ_l (√tail_l + poly error_l) + √trace of the finest explored level.
    double error_estimate() const;
    std::size_t rank(std::size_t k) const;
};

AdaptiveState make_adaptive_state(const ModelHierarchy& hier, const AmlaspaOptions& options);

/// Explores one admissible cell: tops up the level's gradient pool, updates
/// its spectrum and the gains of its explored blocks, refits the level's
/// polynomial on the new subspace, and charges the work.
void explore_cell(AdaptiveState& state, CellIndex cell, const ModelHierarchy& hier, const SeededStream& stream);

/// Multilevel surrogate over the current subspaces.
MlasSurrogate assemble_surrogate(const AdaptiveState& state);

struct AmlaspaResult {
    MlasSurrogate surrogate;
    AdaptiveState state;
    std::vector<CellIndex> exploration_order;
    std::vector<nlohmann::json> trace;
    double error_estimate = 0.0;
    double work = 0.0;
    bool partial = false;  // budget spent before the first expansion, or a capped polynomial fit
};

AmlaspaResult amlaspa(const ModelHierarchy& hier, const AmlaspaOptions& options, const SeededStream& stream);

/// One JSON document per line.
void write_trace(std::ostream& os, const std::vector<nlohmann::json>& trace);

}  // namespace mlas
