#include "mlas/lstsq.hpp"

#include <cmath>
#include <string>

namespace mlas {

std::size_t required_samples(std::size_t m, double t) {
    if (m == 0) throw std::invalid_argument("required_samples: m must be positive");
    if (!(t > 0.0)) throw std::invalid_argument("required_samples: t must be positive");
    const double kappa = (1.0 - std::log(2.0)) / (2.0 + 2.0 * t);
    const auto ok = [&](std::size_t n) {
        const double dn = static_cast<double>(n);
        return static_cast<double>(m) <= kappa * dn / std::log(dn);
    };
    if (ok(2)) return 2;
    // n / log n is increasing for n >= 3: gallop, then bisect.
    std::size_t lo = 2, hi = 4;
    while (!ok(hi)) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

Eigen::MatrixXd gram_matrix(const MultiIndexSet& set, const WeightedSamples& samples) {
    const Eigen::MatrixXd B = set.basis_matrix(samples.points);
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    return inv_n * (B.transpose() * samples.weights.asDiagonal() * B);
}

double gram_deviation(const Eigen::MatrixXd& gram) {
    if (gram.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    return std::max(std::abs(ev.minCoeff() - 1.0), std::abs(ev.maxCoeff() - 1.0));
}

LsFit fit(const MultiIndexSet& set, const WeightedSamples& samples, const Eigen::MatrixXd& values) {
    const std::size_t n = samples.size();
    if (set.empty()) throw std::invalid_argument("fit: empty index set");
    if (static_cast<std::size_t>(values.rows()) != n) {
        throw std::invalid_argument("fit: value count does not match sample count");
    }
    // Fewer samples than basis functions: G is singular, so its smallest eigenvalue is 0.
    if (n < set.size()) throw ConditioningError("fit: fewer samples than basis functions", 1.0);
    if (n > 0 && !(samples.weights.minCoeff() > 0.0)) throw std::invalid_argument("fit: non-positive weight");

    const Eigen::MatrixXd B = set.basis_matrix(samples.points);
    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::MatrixXd WB = samples.weights.asDiagonal() * B;
    const Eigen::MatrixXd G = inv_n * (B.transpose() * WB);
    const Eigen::MatrixXd J = inv_n * (WB.transpose() * values);

    LsFit out;
    out.n_samples = n;
    out.gram_deviation = gram_deviation(G);
    if (!(out.gram_deviation < 1.0)) {
        throw ConditioningError("fit: Gram matrix deviation " + std::to_string(out.gram_deviation) + " >= 1",
                                out.gram_deviation);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("fit: Gram matrix is not positive definite", out.gram_deviation);
    }
    out.coefficients = llt.solve(J);

    const Eigen::MatrixXd misfit = B * out.coefficients - values;
    out.residuals = (inv_n * (samples.weights.asDiagonal() * misfit.cwiseAbs2()).colwise().sum()).cwiseSqrt().transpose();
    return out;
}

LsFit fit(const MultiIndexSet& set, const WeightedSamples& samples, const Eigen::VectorXd& values) {
    return fit(set, samples, Eigen::MatrixXd(values));
}

}  // namespace mlas
