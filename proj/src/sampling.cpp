#include "mlas/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace mlas {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Engine SeededStream::engine() const {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(id ^ 0x5851f42d4c957f2dULL);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Engine(seq);
}

SeededStream SeededStream::child(std::uint64_t k) const {
    return SeededStream{seed, splitmix64(splitmix64(id) + k + 1)};
}

Eigen::MatrixXd draw_gaussian(std::size_t dim, Engine& engine, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) points(i, j) = normal(engine);
    }
    return points;
}

Eigen::MatrixXd draw_gaussian(std::size_t dim, const SeededStream& stream, std::size_t n) {
    Engine engine = stream.engine();
    return draw_gaussian(dim, engine, n);
}

double optimal_weight(const MultiIndexSet& set, std::span<const double> x) {
    if (set.empty()) throw std::invalid_argument("optimal_weight: empty index set");
    const double s = set.christoffel_sum(x);
    if (!(s > 0.0)) throw std::domain_error("optimal_weight: vanishing Christoffel sum");
    return static_cast<double>(set.size()) / s;
}

// ---------------------------------------------------------------------------
// Univariate H_n² φ sampling by inversion of the closed-form CDF.

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gaussian_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double hermite_squared_pdf(unsigned n, double x, std::vector<double>& h) {
    h.resize(n + 1);
    hermite_eval_into(x, h);
    return h[n] * h[n] * gaussian_pdf(x);
}

// Coarse CDF table used to bracket the root before the Newton polish.
struct CdfTable {
    double lo = 0.0;
    double step = 0.0;
    std::vector<double> cdf;
};

constexpr std::size_t kTableNodes = 1024;

std::shared_ptr<const CdfTable> cdf_table(unsigned n) {
    static std::mutex mutex;
    static std::unordered_map<unsigned, std::shared_ptr<const CdfTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        auto table = std::make_shared<CdfTable>();
        const double r = hermite_squared_truncation(n);
        table->lo = -r;
        table->step = 2.0 * r / static_cast<double>(kTableNodes - 1);
        table->cdf.resize(kTableNodes);
        for (std::size_t i = 0; i < kTableNodes; ++i) {
            table->cdf[i] = hermite_squared_cdf(n, table->lo + table->step * static_cast<double>(i));
        }
        // Enforce monotonicity against round-off in the far tails.
        for (std::size_t i = 1; i < kTableNodes; ++i) table->cdf[i] = std::max(table->cdf[i], table->cdf[i - 1]);
        slot = std::move(table);
    }
    return slot;
}

}  // namespace

double hermite_squared_truncation(unsigned n) { return std::sqrt(2.0 * (2.0 * n + 1.0)) + 6.0; }

double hermite_squared_cdf(unsigned n, double x) {
    if (std::isnan(x)) throw std::invalid_argument("hermite_squared_cdf: NaN argument");
    if (x == -INFINITY) return 0.0;
    if (x == INFINITY) return 1.0;
    std::vector<double> h(n + 1);
    hermite_eval_into(x, h);
    double s = 0.0;
    for (unsigned k = 1; k <= n; ++k) s += h[k - 1] * h[k] / std::sqrt(static_cast<double>(k));
    return std::clamp(gaussian_cdf(x) - gaussian_pdf(x) * s, 0.0, 1.0);
}

double hermite_squared_quantile(unsigned n, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("hermite_squared_quantile: u outside [0,1]");
    const auto table = cdf_table(n);
    const auto& cdf = table->cdf;
    if (u <= cdf.front()) return table->lo;
    if (u >= cdf.back()) return -table->lo;

    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t hi_idx = static_cast<std::size_t>(it - cdf.begin());
    double a = table->lo + table->step * static_cast<double>(hi_idx - 1);
    double b = a + table->step;
    double fa = cdf[hi_idx - 1] - u;

    // Safeguarded Newton on F(x) - u inside [a, b].
    std::vector<double> h;
    const double span_ab = b - a;
    double x = (cdf[hi_idx] > cdf[hi_idx - 1])
                   ? a + span_ab * (u - cdf[hi_idx - 1]) / (cdf[hi_idx] - cdf[hi_idx - 1])
                   : 0.5 * (a + b);
    for (int iter = 0; iter < 100; ++iter) {
        const double fx = hermite_squared_cdf(n, x) - u;
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        const double dens = hermite_squared_pdf(n, x, h);
        double next = (dens > 0.0) ? x - fx / dens : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || (b - a) <= 1e-15 * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

Eigen::VectorXd draw_component(const MultiIndex& nu, std::size_t dim, Engine& engine) {
    if (nu.support_dim() > dim) throw std::invalid_argument("draw_component: index exceeds dimension");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
        x[static_cast<Eigen::Index>(j)] = hermite_squared_quantile(nu[static_cast<std::uint32_t>(j)], uniform(engine));
    }
    return x;
}

WeightedSamples draw_optimal(const MultiIndexSet& set, const SeededStream& stream, std::size_t n) {
    if (set.empty()) throw std::invalid_argument("draw_optimal: empty index set");
    Engine engine = stream.engine();
    std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
    WeightedSamples out;
    out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(set.dim()));
    out.weights.resize(static_cast<Eigen::Index>(n));
    std::vector<double> x(set.dim());
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd p = draw_component(set[pick(engine)], set.dim(), engine);
        out.points.row(static_cast<Eigen::Index>(i)) = p.transpose();
        std::copy(p.data(), p.data() + p.size(), x.begin());
        out.weights[static_cast<Eigen::Index>(i)] = optimal_weight(set, x);
    }
    return out;
}

}  // namespace mlas
