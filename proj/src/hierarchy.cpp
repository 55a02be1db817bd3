#include "mlas/hierarchy.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

#include "mlas/parallel.hpp"

namespace mlas {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n) { g_threads = n == 0 ? 1 : n; }
unsigned thread_count() { return g_threads; }

CallableHierarchy::CallableHierarchy(std::size_t dim, int max_level, ValueFn value, GradientFn gradient, WorkFn work)
    : dim_(dim), max_level_(max_level), value_(std::move(value)), gradient_(std::move(gradient)), work_(std::move(work)) {
    if (dim_ == 0) throw std::invalid_argument("CallableHierarchy: dim must be positive");
    if (max_level_ < 0) throw std::invalid_argument("CallableHierarchy: max_level must be >= 0");
}

void CallableHierarchy::check(int level, const Eigen::VectorXd& y) const {
    if (level < 0 || level > max_level_) throw std::out_of_range("level " + std::to_string(level) + " out of range");
    if (static_cast<std::size_t>(y.size()) != dim_) throw std::invalid_argument("point dimension mismatch");
}

double CallableHierarchy::work(int level) const { return work_(level); }

double CallableHierarchy::value(int level, const Eigen::VectorXd& y) const {
    check(level, y);
    return value_(level, y);
}

Eigen::VectorXd CallableHierarchy::gradient(int level, const Eigen::VectorXd& y) const {
    check(level, y);
    return gradient_(level, y);
}

FixedLevelHierarchy::FixedLevelHierarchy(const ModelHierarchy& base, int level) : base_(base), level_(level) {
    if (level < 0 || level > base.max_level()) throw std::out_of_range("FixedLevelHierarchy: level out of range");
}

void FixedLevelHierarchy::check(int level) const {
    if (level != 0) throw std::out_of_range("FixedLevelHierarchy: only level 0 exists");
}

double FixedLevelHierarchy::work(int level) const {
    check(level);
    return base_.work(level_);
}

double FixedLevelHierarchy::value(int level, const Eigen::VectorXd& y) const {
    check(level);
    return base_.value(level_, y);
}

Eigen::VectorXd FixedLevelHierarchy::gradient(int level, const Eigen::VectorXd& y) const {
    check(level);
    return base_.gradient(level_, y);
}

ValueAndGradient FixedLevelHierarchy::value_and_gradient(int level, const Eigen::VectorXd& y) const {
    check(level);
    return base_.value_and_gradient(level_, y);
}

double delta_eval(const ModelHierarchy& hier, int level, const Eigen::VectorXd& y) {
    const double fine = hier.value(level, y);
    return level == 0 ? fine : fine - hier.value(level - 1, y);
}

Eigen::VectorXd delta_grad(const ModelHierarchy& hier, int level, const Eigen::VectorXd& y) {
    Eigen::VectorXd g = hier.gradient(level, y);
    if (level > 0) g -= hier.gradient(level - 1, y);
    return g;
}

double delta_work(const ModelHierarchy& hier, int level) {
    return hier.work(level) + (level > 0 ? hier.work(level - 1) : 0.0);
}

double target_work(const ModelHierarchy& hier, int level, Target target) {
    return target == Target::Difference ? delta_work(hier, level) : hier.work(level);
}

Eigen::MatrixXd gradient_batch(const ModelHierarchy& hier, int level, Target target, const Eigen::MatrixXd& points) {
    Eigen::MatrixXd grads(points.rows(), static_cast<Eigen::Index>(hier.dim()));
    parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t i) {
        const Eigen::VectorXd y = points.row(static_cast<Eigen::Index>(i)).transpose();
        grads.row(static_cast<Eigen::Index>(i)) =
            (target == Target::Difference ? delta_grad(hier, level, y) : hier.gradient(level, y)).transpose();
    });
    return grads;
}

Eigen::VectorXd value_batch(const ModelHierarchy& hier, int level, Target target, const Eigen::MatrixXd& points) {
    Eigen::VectorXd values(points.rows());
    parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t i) {
        const Eigen::VectorXd y = points.row(static_cast<Eigen::Index>(i)).transpose();
        values[static_cast<Eigen::Index>(i)] =
            target == Target::Difference ? delta_eval(hier, level, y) : hier.value(level, y);
    });
    return values;
}

LevelWork& WorkLedger::slot(int level, double unit_cost) {
    if (level < 0) throw std::invalid_argument("WorkLedger: negative level");
    if (levels_.size() <= static_cast<std::size_t>(level)) {
        const auto old = levels_.size();
        levels_.resize(static_cast<std::size_t>(level) + 1);
        for (auto i = old; i < levels_.size(); ++i) levels_[i].level = static_cast<int>(i);
    }
    auto& s = levels_[static_cast<std::size_t>(level)];
    if (s.unit_cost == 0.0) {
        s.unit_cost = unit_cost;
    } else if (s.unit_cost != unit_cost) {
        throw std::invalid_argument("WorkLedger: inconsistent unit cost at level " + std::to_string(level));
    }
    return s;
}

void WorkLedger::charge_gradients(int level, std::size_t count, double unit_cost) {
    slot(level, unit_cost).gradient_evals += count;
}

void WorkLedger::charge_functions(int level, std::size_t count, double unit_cost) {
    slot(level, unit_cost).function_evals += count;
}

void WorkLedger::merge(const WorkLedger& other) {
    for (const auto& lw : other.levels_) {
        if (lw.gradient_evals == 0 && lw.function_evals == 0) continue;
        auto& s = slot(lw.level, lw.unit_cost);
        s.gradient_evals += lw.gradient_evals;
        s.function_evals += lw.function_evals;
    }
}

double WorkLedger::total() const {
    double t = 0.0;
    for (const auto& lw : levels_) t += lw.total();
    return t;
}

void to_json(nlohmann::json& j, const WorkLedger& ledger) {
    j = nlohmann::json::array();
    for (const auto& lw : ledger.levels()) {
        j.push_back({{"level", lw.level},
                     {"gradient_evals", lw.gradient_evals},
                     {"function_evals", lw.function_evals},
                     {"unit_cost", lw.unit_cost}});
    }
}

void from_json(const nlohmann::json& j, WorkLedger& ledger) {
    ledger = WorkLedger{};
    for (const auto& e : j) {
        const int level = e.at("level").get<int>();
        const double cost = e.at("unit_cost").get<double>();
        ledger.charge_gradients(level, e.at("gradient_evals").get<std::size_t>(), cost);
        ledger.charge_functions(level, e.at("function_evals").get<std::size_t>(), cost);
    }
}

}  // namespace mlas
