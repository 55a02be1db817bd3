#include <doctest.h>

#include <cmath>
#include <random>

#include "mlas/lognormal_pde.hpp"
#include "mlas/sampling.hpp"

using namespace mlas;

namespace {

// −Δu₁ = 1 on the unit square, zero boundary data, by the double sine series
// u₁ = Σ_{m,n odd} 16 / (π⁴ m n (m² + n²)) sin(mπx) sin(nπy).
double poisson_series(double x, double y, int terms = 801) {
    double s = 0.0;
    for (int m = 1; m <= terms; m += 2) {
        for (int n = 1; n <= terms; n += 2) {
            s += std::sin(m * M_PI * x) * std::sin(n * M_PI * y) / (double(m) * n * (double(m) * m + double(n) * n));
        }
    }
    return 16.0 / std::pow(M_PI, 4) * s;
}

// ∫u₁ = Σ_{m,n odd} 64 / (π⁶ m² n² (m² + n²)).
double poisson_mean() {
    double s = 0.0;
    for (int m = 1; m <= 8001; m += 2) {
        for (int n = 1; n <= 8001; n += 2) s += 1.0 / (double(m) * m * n * n * (double(m) * m + double(n) * n));
    }
    return 64.0 / std::pow(M_PI, 6) * s;
}

ExpansionConfig small(std::size_t d = 10) {
    ExpansionConfig c;
    c.d = d;
    c.max_level = 5;
    return c;
}

Eigen::VectorXd gaussian(std::size_t d, std::uint64_t id) {
    return draw_gaussian(d, SeededStream{77, id}, 1).row(0).transpose();
}

}  // namespace

TEST_CASE("config validation") {
    ExpansionConfig c;
    CHECK_NOTHROW(c.validate());
    c.d = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    const nlohmann::json j = small();
    CHECK(j.get<ExpansionConfig>().d == 10);
}

TEST_CASE("expansion modes and the log-coefficient") {
    const auto c = small(4);
    CHECK(expansion_mode(c, 1, 0.3, 0.5) == doctest::Approx(1.0));              // sin(π/2)
    CHECK(expansion_mode(c, 2, 0.0, 0.7) == doctest::Approx(1.0));              // cos(0)
    CHECK(expansion_mode(c, 4, 0.5, 0.0) == doctest::Approx(-0.25));            // 2^{−2} cos(π)
    CHECK(expansion_mode(c, 3, 0.0, 0.25) == doctest::Approx(0.25));            // 2^{−2} sin(π/2)

    Eigen::MatrixXd pts(3, 2);
    pts << 0.0, 0.0, 0.2, 0.9, 0.5, 0.5;
    const Eigen::VectorXd b0 = log_coefficient(c, Eigen::VectorXd::Zero(4), pts);
    CHECK((b0.array() == -4.6).all());

    auto c2 = small(2);
    const Eigen::VectorXd b = log_coefficient(c2, Eigen::Vector2d(0.0, 1.0), pts.topRows(1));
    CHECK(b[0] == doctest::Approx(-3.6));

    const Eigen::VectorXd y = gaussian(4, 1);
    const Eigen::VectorXd by = log_coefficient(c, y, pts);
    for (Eigen::Index p = 0; p < 3; ++p) {
        double s = c.b_bar;
        for (std::size_t i = 1; i <= 4; ++i) s += y[static_cast<Eigen::Index>(i - 1)] * expansion_mode(c, i, pts(p, 0), pts(p, 1));
        CHECK(std::abs(by[p] - s) < 1e-14);
    }
}

TEST_CASE("work model") {
    const LognormalPde pde(small());
    CHECK(pde.work(0) == doctest::Approx(16.0));
    for (int l = 0; l < 5; ++l) CHECK(pde.work(l + 1) / pde.work(l) == doctest::Approx(4.0));
    CHECK(pde.cells_per_side(3) == 32);
}

TEST_CASE("qoi of piecewise-linear fields") {
    DiscreteField u{0, 2, Eigen::VectorXd::Zero(9)};
    CHECK(qoi(u) == 0.0);
    u.values[4] = 1.0;  // central hat function
    CHECK(qoi(u) == doctest::Approx(0.25));  // six triangles of area 1/8, a third each
    DiscreteField two = u;
    two.values *= 2.0;
    CHECK(qoi(two) == doctest::Approx(2.0 * qoi(u)));
    DiscreteField one{0, 3, Eigen::VectorXd::Ones(16)};
    CHECK(qoi(one) == doctest::Approx(1.0));
}

TEST_CASE("y = 0: solution against the double sine series") {
    const LognormalPde pde(small());
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(10);
    const double scale = std::exp(4.6);
    // Nodes (i/4, j/4) exist on every level.
    const std::array<std::array<double, 2>, 5> probes{{{0.25, 0.25}, {0.5, 0.5}, {0.75, 0.25}, {0.25, 0.75}, {0.5, 0.25}}};
    double prev = INFINITY;
    for (int l = 2; l <= 4; ++l) {
        const auto u = pde.solve(l, zero);
        double err = 0.0;
        for (const auto& p : probes) {
            const auto i = static_cast<unsigned>(std::lround(p[0] * u.n));
            const auto j = static_cast<unsigned>(std::lround(p[1] * u.n));
            err = std::max(err, std::abs(u.at(i, j) / scale - poisson_series(p[0], p[1])));
        }
        CHECK(err <= 0.2 * u.h() * u.h());
        if (l > 2) CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("y = 0: maximum at the center node") {
    const LognormalPde pde(small());
    const auto u = pde.solve(3, Eigen::VectorXd::Zero(10));
    Eigen::Index arg = 0;
    u.values.maxCoeff(&arg);
    CHECK(arg == static_cast<Eigen::Index>((u.n / 2) * (u.n + 1) + u.n / 2));
}

TEST_CASE("y = 0: successive levels converge at rate close to four") {
    const LognormalPde pde(small());
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(10);
    std::vector<double> diffs;
    DiscreteField coarse = pde.solve(2, zero);
    for (int l = 3; l <= 5; ++l) {
        const auto fine = pde.solve(l, zero);
        double d = 0.0;
        for (unsigned j = 0; j <= coarse.n; ++j) {
            for (unsigned i = 0; i <= coarse.n; ++i) d = std::max(d, std::abs(fine.at(2 * i, 2 * j) - coarse.at(i, j)));
        }
        diffs.push_back(d);
        coarse = fine;
    }
    for (std::size_t k = 1; k < diffs.size(); ++k) {
        const double rate = diffs[k - 1] / diffs[k];
        CHECK(rate > 3.0);
        CHECK(rate < 5.0);
    }
}

TEST_CASE("y = 0: QoI approaches the series mean") {
    const LognormalPde pde(small());
    const double exact = std::exp(4.6) * poisson_mean();
    std::vector<double> err;
    for (int l = 2; l <= 5; ++l) err.push_back(std::abs(pde.value(l, Eigen::VectorXd::Zero(10)) - exact));
    for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.8);
    CHECK(err.back() / exact < 1e-3);
}

TEST_CASE("QoI converges at order >= 1.8 for random y") {
    const LognormalPde pde(small());
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Eigen::VectorXd y = gaussian(10, 100 + s);
        std::vector<double> q;
        for (int l = 2; l <= 5; ++l) q.push_back(pde.value(l, y));
        // Differences of successive levels shrink like h².
        const double r1 = std::abs(q[1] - q[0]) / std::abs(q[2] - q[1]);
        const double r2 = std::abs(q[2] - q[1]) / std::abs(q[3] - q[2]);
        CHECK(std::log2(r1) >= 1.8);
        CHECK(std::log2(r2) >= 1.8);
    }
}

TEST_CASE("stiffness is symmetric positive definite with positive diagonal") {
    const LognormalPde pde(small());
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto a = pde.stiffness(2, gaussian(10, 200 + s));
        const Eigen::MatrixXd dense(a);
        CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(dense.diagonal().minCoeff() > 0.0);
        Eigen::LLT<Eigen::MatrixXd> llt(dense);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("solution residual is at machine level") {
    const LognormalPde pde(small());
    const Eigen::VectorXd y = gaussian(10, 300);
    const auto a = pde.stiffness(3, y);
    const auto u = pde.solve(3, y);
    // Interior unknowns in the stiffness ordering are recovered by solving again.
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(a.rows());
    const Eigen::VectorXd x = ldlt.solve(rhs);
    CHECK((a * x - rhs).norm() / rhs.norm() < 1e-12);
    // The load of every interior node is h², so u = h² x up to ordering.
    CHECK(u.values.maxCoeff() == doctest::Approx(x.maxCoeff() * u.h() * u.h()).epsilon(1e-10));
}

TEST_CASE("adjoint equals the primal solution for unit forcing") {
    const LognormalPde pde(small());
    const Eigen::VectorXd y = gaussian(10, 400);
    const auto u = pde.solve(3, y);
    const auto p = pde.adjoint(3, y);
    CHECK((u.values - p.values).lpNorm<Eigen::Infinity>() <= 1e-12 * u.values.lpNorm<Eigen::Infinity>());
}

TEST_CASE("solutions are nonnegative") {
    const LognormalPde pde(small());
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Eigen::VectorXd y = gaussian(10, 500 + s);
        for (int l = 0; l <= 4; l += 2) CHECK(pde.solve(l, y).values.minCoeff() >= 0.0);
    }
}

TEST_CASE("adjoint gradient against central differences") {
    const LognormalPde pde(small());
    std::mt19937_64 rng(12);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const Eigen::VectorXd y = gaussian(10, 600 + s);
        const auto vg = pde.value_and_gradient(3, y);
        CHECK(vg.value == pde.value(3, y));
        CHECK(vg.gradient == pde.grad_qoi(3, y));
        for (int t = 0; t < 5; ++t) {
            const auto j = static_cast<Eigen::Index>(rng() % 10);
            Eigen::VectorXd yp = y, ym = y;
            yp[j] += 1e-4;
            ym[j] -= 1e-4;
            const double fd = (pde.value(3, yp) - pde.value(3, ym)) / 2e-4;
            CHECK(std::abs(fd - vg.gradient[j]) / (std::abs(vg.gradient[j]) + 1e-12) <= 1e-5);
        }
    }
}

TEST_CASE("gradient magnitudes follow the mode decay") {
    const LognormalPde pde(small());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
    for (std::uint64_t s = 0; s < 50; ++s) mean += pde.gradient(2, gaussian(10, 700 + s)).cwiseAbs();
    CHECK(mean.head(2).minCoeff() > mean.tail(2).maxCoeff());
}

TEST_CASE("level and dimension checks") {
    const LognormalPde pde(small());
    CHECK_THROWS_AS(pde.value(6, Eigen::VectorXd::Zero(10)), std::out_of_range);
    CHECK_THROWS_AS(pde.value(0, Eigen::VectorXd::Zero(9)), std::invalid_argument);
    CHECK(pde.centroids(0).rows() == 2 * 16);
}
