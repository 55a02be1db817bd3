#pragma once

// Log-normal diffusion benchmark: −div(exp(b(y)) ∇u) = forcing on the unit
// square with homogeneous Dirichlet data, P1 elements on a uniform mesh of
// right triangles, QoI = ∫u dx, and adjoint parametric gradients.

#include <array>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "mlas/hierarchy.hpp"

namespace mlas {

/// Parameters of b(y) = b̄ + Σ_i y_i ψ_i(x) and of the mesh hierarchy.
///
/// Mode i (1-based) uses j = ceil(i/2): even i gives j^{−α} cos(jπx₁),
/// odd i gives j^{−α} sin(jπx₂).
struct ExpansionConfig {
    std::size_t d = 100;
    double alpha = 2.0;
    double b_bar = -4.6;
    unsigned n0 = 4;        // cells per side on level 0
    int max_level = 5;
    double gamma = 2.0;     // work(l) = h_l^{−γ}
    double forcing = 1.0;   // constant right-hand side

    /// Throws std::invalid_argument with the offending field name.
    void validate() const;
};

void to_json(nlohmann::json& j, const ExpansionConfig& c);
void from_json(const nlohmann::json& j, ExpansionConfig& c);

/// ψ_i(x) for 1-based i.
double expansion_mode(const ExpansionConfig& cfg, std::size_t i, double x1, double x2);

/// b(y) at each row (x₁, x₂) of `points`.
Eigen::VectorXd log_coefficient(const ExpansionConfig& cfg, const Eigen::VectorXd& y, const Eigen::MatrixXd& points);

/// Nodal values on the (n+1)² grid of a level, node (i, j) at index j·(n+1) + i.
struct DiscreteField {
    int level = 0;
    unsigned n = 0;
    Eigen::VectorXd values;

    double h() const { return 1.0 / n; }
    double at(unsigned i, unsigned j) const { return values[static_cast<Eigen::Index>(j * (n + 1) + i)]; }
};

/// Exact integral of the piecewise-linear interpolant of `u`.
double qoi(const DiscreteField& u);

class LognormalPde final : public ModelHierarchy {
public:
    explicit LognormalPde(ExpansionConfig cfg);
    ~LognormalPde() override;

    const ExpansionConfig& config() const { return cfg_; }

    std::size_t dim() const override { return cfg_.d; }
    int max_level() const override { return cfg_.max_level; }
    double work(int level) const override;
    double value(int level, const Eigen::VectorXd& y) const override;
    Eigen::VectorXd gradient(int level, const Eigen::VectorXd& y) const override;
    ValueAndGradient value_and_gradient(int level, const Eigen::VectorXd& y) const override;

    unsigned cells_per_side(int level) const;
    DiscreteField solve(int level, const Eigen::VectorXd& y) const;
    /// Adjoint state p with A p = (∂QoI/∂u); equals u / forcing.
    DiscreteField adjoint(int level, const Eigen::VectorXd& y) const;
    Eigen::VectorXd grad_qoi(int level, const Eigen::VectorXd& y) const;

    /// Interior stiffness matrix for parameter y.
    Eigen::SparseMatrix<double> stiffness(int level, const Eigen::VectorXd& y) const;
    /// Element centroids of a level, one per row.
    Eigen::MatrixXd centroids(int level) const;

private:
    struct Level;
    struct Solution;

    const Level& level_data(int level) const;
    Solution solve_full(int level, const Eigen::VectorXd& y, bool with_adjoint) const;

    ExpansionConfig cfg_;
    mutable std::unique_ptr<std::once_flag[]> once_;
    mutable std::vector<std::unique_ptr<Level>> levels_;
};

}  // namespace mlas
