#pragma once

// Model hierarchies f_0, f_1, ... with gradients and a per-level work model,
// the mixed differences Δ_l = f_l − f_{l−1} (f_{−1} := 0), and the work
// ledger every fitting pipeline charges against.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace mlas {

struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Evaluator of f_l(y), ∇f_l(y) and the modeled cost of one evaluation.
/// Implementations must be deterministic in (level, y) and safe to call
/// concurrently from several threads.
class ModelHierarchy {
public:
    virtual ~ModelHierarchy() = default;

    virtual std::size_t dim() const = 0;
    virtual int max_level() const = 0;
    /// Cost of one function or gradient evaluation at `level`; nondecreasing.
    virtual double work(int level) const = 0;
    virtual double value(int level, const Eigen::VectorXd& y) const = 0;
    virtual Eigen::VectorXd gradient(int level, const Eigen::VectorXd& y) const = 0;
    /// Override when both come out of one model solve.
    virtual ValueAndGradient value_and_gradient(int level, const Eigen::VectorXd& y) const {
        return {value(level, y), gradient(level, y)};
    }
};

/// Hierarchy backed by callables; used for closed-form test models.
class CallableHierarchy final : public ModelHierarchy {
public:
    using ValueFn = std::function<double(int, const Eigen::VectorXd&)>;
    using GradientFn = std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)>;
    using WorkFn = std::function<double(int)>;

    CallableHierarchy(std::size_t dim, int max_level, ValueFn value, GradientFn gradient, WorkFn work);

    std::size_t dim() const override { return dim_; }
    int max_level() const override { return max_level_; }
    double work(int level) const override;
    double value(int level, const Eigen::VectorXd& y) const override;
    Eigen::VectorXd gradient(int level, const Eigen::VectorXd& y) const override;

private:
    void check(int level, const Eigen::VectorXd& y) const;

    std::size_t dim_;
    int max_level_;
    ValueFn value_;
    GradientFn gradient_;
    WorkFn work_;
};

/// A single level of another hierarchy exposed as level 0.
class FixedLevelHierarchy final : public ModelHierarchy {
public:
    FixedLevelHierarchy(const ModelHierarchy& base, int level);

    std::size_t dim() const override { return base_.dim(); }
    int max_level() const override { return 0; }
    double work(int level) const override;
    double value(int level, const Eigen::VectorXd& y) const override;
    Eigen::VectorXd gradient(int level, const Eigen::VectorXd& y) const override;
    ValueAndGradient value_and_gradient(int level, const Eigen::VectorXd& y) const override;

private:
    void check(int level) const;
    const ModelHierarchy& base_;
    int level_;
};

/// Which quantity a sampling pass targets at level l: f_l or Δ_l.
enum class Target { Function, Difference };

/// Δ_l(y); Δ_0 = f_0.
double delta_eval(const ModelHierarchy& hier, int level, const Eigen::VectorXd& y);
/// ∇Δ_l(y); ∇Δ_0 = ∇f_0.
Eigen::VectorXd delta_grad(const ModelHierarchy& hier, int level, const Eigen::VectorXd& y);
/// work(l) + work(l−1), with work(−1) := 0.
double delta_work(const ModelHierarchy& hier, int level);
double target_work(const ModelHierarchy& hier, int level, Target target);

/// Gradients of f_l or Δ_l at the rows of `points`, one gradient per row.
Eigen::MatrixXd gradient_batch(const ModelHierarchy& hier, int level, Target target, const Eigen::MatrixXd& points);
/// Values of f_l or Δ_l at the rows of `points`.
Eigen::VectorXd value_batch(const ModelHierarchy& hier, int level, Target target, const Eigen::MatrixXd& points);

/// Evaluation counts per level, each charged at that level's unit cost
/// (work(l) + work(l−1) for differences).
struct LevelWork {
    int level = 0;
    std::size_t gradient_evals = 0;
    std::size_t function_evals = 0;
    double unit_cost = 0.0;

    double total() const { return static_cast<double>(gradient_evals + function_evals) * unit_cost; }
};

class WorkLedger {
public:
    void charge_gradients(int level, std::size_t count, double unit_cost);
    void charge_functions(int level, std::size_t count, double unit_cost);
    void merge(const WorkLedger& other);

    double total() const;
    const std::vector<LevelWork>& levels() const { return levels_; }

private:
    LevelWork& slot(int level, double unit_cost);
    std::vector<LevelWork> levels_;
};

void to_json(nlohmann::json& j, const WorkLedger& ledger);
void from_json(const nlohmann::json& j, WorkLedger& ledger);

}  // namespace mlas
