#pragma once

// Multilevel active subspaces with polynomial approximation: the fixed-plan
// fitting pipeline, the telescoping surrogate, error estimation, and Monte
// Carlo oracles for the ideal (conditional-expectation) reconstruction.

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlas/asm.hpp"
#include "mlas/hierarchy.hpp"
#include "mlas/lstsq.hpp"
#include "mlas/polyspace.hpp"
#include "mlas/sampling.hpp"

namespace mlas {

/// Diagnostics recorded when a level is fitted.
struct FitDiagnostics {
    std::size_t gradient_samples = 0;
    std::size_t fit_samples = 0;
    double gram_deviation = 0.0;
    double residual = 0.0;
    double svd_tail = 0.0;  // Σ_{j>r} σ̂²_j of the level's covariance
    int redraws = 0;
};

/// g_l ∘ Uᵀ: a Hermite expansion in the active variables x = Uᵀy.
struct LevelSurrogate {
    int level = 0;
    Subspace subspace;
    MultiIndexSet index_set;
    Eigen::VectorXd coeffs;
    FitDiagnostics diagnostics;

    double evaluate(const Eigen::VectorXd& y) const;
};

/// Σ_l g_l ∘ U_lᵀ plus the work spent building it.
struct MlasSurrogate {
    std::size_t dim = 0;
    std::vector<LevelSurrogate> levels;
    WorkLedger work;

    double evaluate(const Eigen::VectorXd& y) const;
    Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& points) const;
    /// Highest level present, -1 when empty.
    int finest_level() const;
};

constexpr int kSurrogateFormatVersion = 1;
void to_json(nlohmann::json& j, const MlasSurrogate& s);
/// Throws std::invalid_argument on a format or version mismatch.
void from_json(const nlohmann::json& j, MlasSurrogate& s);

/// How the polynomial space on r active variables is chosen: total degree p,
/// the largest p <= max_degree whose set size stays within max_size.
struct IndexSetRule {
    unsigned max_degree = 2;
    std::size_t max_size = std::numeric_limits<std::size_t>::max();

    unsigned degree_for(std::size_t rank) const;
};

/// Sequences r_0 < … < r_L, M_0 < … < M_L, m_0 < … < m_L. Level l of the
/// telescoping sum uses entry L − l of each sequence.
struct MultilevelPlan {
    int L = 0;
    std::vector<std::size_t> ranks;
    std::vector<std::size_t> gradient_samples;
    std::vector<unsigned> degrees;
    std::vector<std::size_t> poly_dims;

    /// Throws std::invalid_argument unless lengths are L+1 and all three
    /// sequences are strictly increasing.
    void validate() const;
};

/// r_k = ceil(r_base·ratio^k) (bumped to r_{k−1}+1 if rounding repeats a
/// value), M_k = max(ceil(C_M·r_k·log(r_k+1)), r_k+1), degrees from `rule`.
MultilevelPlan geometric_plan(int L, std::size_t r_base, double rank_ratio, double c_m, const IndexSetRule& rule);

/// Conditioning failure that survived every redraw, with the level attached.
class LevelFitError : public ConditioningError {
public:
    LevelFitError(int level, double deviation)
        : ConditioningError("least-squares fit ill-conditioned at level " + std::to_string(level), deviation),
          level_(level) {}
    int level() const { return level_; }

private:
    int level_;
};

/// Fits one telescoping term: SLAS on ∇f_l or ∇Δ_l with M draws, then a
/// weighted least-squares fit of f_l or Δ_l on `index_set` over the active
/// variables, with optimal-measure active points and Gaussian inactive points.
LevelSurrogate fit_level(const ModelHierarchy& hier, int level, Target target, std::size_t rank,
                         std::size_t gradient_samples, const MultiIndexSet& index_set, double t,
                         const SeededStream& stream, WorkLedger& ledger, const ConditioningPolicy& policy = {});

/// Fixed-plan multilevel fit; level l uses rank r_{L−l}, M_{L−l} gradient
/// samples of Δ_l and the total-degree space of degree degrees[L−l].
MlasSurrogate mlaspa_fit(const ModelHierarchy& hier, const MultilevelPlan& plan, double t, const SeededStream& stream,
                         const ConditioningPolicy& policy = {});

/// Single-level pipeline on f_L directly.
MlasSurrogate slaspa_fit(const ModelHierarchy& hier, int level, std::size_t rank, std::size_t gradient_samples,
                         unsigned degree, double t, const SeededStream& stream, const ConditioningPolicy& policy = {});

/// Monte Carlo mean with its standard error.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Fresh Gaussian test points with reference values f_ref(y).
struct TestSet {
    int ref_level = 0;
    Eigen::MatrixXd points;
    Eigen::VectorXd values;
};

TestSet make_test_set(const ModelHierarchy& hier, int ref_level, std::size_t n, const SeededStream& stream);

/// ‖f_ref − S‖_{L²_μ} from a test set; the standard error comes from the
/// delta method applied to the mean squared error.
McEstimate mc_l2_error(const MlasSurrogate& surr, const TestSet& test);
/// Throws std::invalid_argument when ref_level is below the surrogate's finest level.
McEstimate mc_l2_error(const MlasSurrogate& surr, const ModelHierarchy& hier, int ref_level, std::size_t n_test,
                       const SeededStream& stream);

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Monte Carlo estimate of g*(x) = E_z[f(Vx + Wz)], z standard Gaussian on
/// the complement W of V.
McEstimate conditional_expectation_oracle(const ScalarFn& f, const Subspace& v, const Eigen::VectorXd& x,
                                          std::size_t k, const SeededStream& stream);
/// Same with a precomputed completion W and a caller-owned engine.
McEstimate conditional_expectation_oracle(const ScalarFn& f, const Eigen::MatrixXd& v, const Eigen::MatrixXd& w,
                                          const Eigen::VectorXd& x, std::size_t k, Engine& engine);

/// Both sides of the Poincaré-type bound for a fixed subspace, squared:
/// ‖f − g*∘Vᵀ‖² (g* from the inner oracle, inner-variance bias removed)
/// and ‖(I − Π_V)∇f‖², each from `outer` Gaussian draws.
struct PoincareCheck {
    McEstimate error_sq;
    McEstimate bound_sq;

    double error() const;
    double bound() const;
    /// Standard errors of error() and bound() by the delta method.
    double error_sigma() const;
    double bound_sigma() const;
};

PoincareCheck poincare_check(const ScalarFn& f, const VectorFn& grad, const Subspace& v, std::size_t outer,
                             std::size_t inner, const SeededStream& stream);

}  // namespace mlas
