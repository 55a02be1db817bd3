#include <doctest.h>

#include <cmath>

#include "mlas/asm.hpp"

using namespace mlas;

namespace {

Eigen::VectorXd unit(Eigen::Index d, Eigen::Index j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[j] = 1.0;
    return e;
}

CallableHierarchy linear_model(const Eigen::VectorXd& c) {
    return CallableHierarchy(
        static_cast<std::size_t>(c.size()), 2, [c](int, const Eigen::VectorXd& y) { return c.dot(y); },
        [c](int, const Eigen::VectorXd&) { return c; }, [](int l) { return std::pow(4.0, l); });
}

double orthonormality_error(const Eigen::MatrixXd& u) {
    return (u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("sample_covariance examples") {
    Eigen::MatrixXd g(2, 3);
    g << 1, 0, 0, 1, 0, 0;
    CHECK(sample_covariance(g) == unit(3, 0) * unit(3, 0).transpose());
    g << 1, 0, 0, 0, 1, 0;
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(0, 0) = expected(1, 1) = 0.5;
    CHECK(sample_covariance(g).isApprox(expected));
}

TEST_CASE("covariance of a quadratic's gradients approaches diag(4, 1)") {
    // f(y) = ½ yᵀ diag(2,1) y, ∇f = (2 y₁, y₂). Entry (0,0) has variance
    // 16·Var(y₁²)/M = 32/M, entry (1,1) 2/M, off-diagonal 4/M.
    const std::size_t m = 500;
    const Eigen::MatrixXd y = draw_gaussian(2, SeededStream{8, 0}, m);
    Eigen::MatrixXd g = y;
    g.col(0) *= 2.0;
    const Eigen::MatrixXd c = sample_covariance(g);
    const double md = static_cast<double>(m);
    CHECK(std::abs(c(0, 0) - 4.0) <= 3.0 * std::sqrt(32.0 / md));
    CHECK(std::abs(c(1, 1) - 1.0) <= 3.0 * std::sqrt(2.0 / md));
    CHECK(std::abs(c(0, 1)) <= 3.0 * std::sqrt(4.0 / md));
}

TEST_CASE("truncated_eig examples") {
    const auto id = truncated_eig(Eigen::MatrixXd::Identity(3, 3), 3);
    CHECK((id.eigvals.array() - 1.0).abs().maxCoeff() < 1e-14);
    CHECK(orthonormality_error(id.eigvecs) < 1e-12);

    const auto e1 = truncated_eig(unit(4, 0) * unit(4, 0).transpose(), 1);
    CHECK(e1.eigvals[0] == doctest::Approx(1.0));
    CHECK(std::abs(std::abs(e1.eigvecs(0, 0)) - 1.0) < 1e-12);

    Eigen::MatrixXd ns = Eigen::MatrixXd::Identity(3, 3);
    ns(0, 1) = 0.1;
    CHECK_THROWS_AS(truncated_eig(ns, 1), std::invalid_argument);
    CHECK_THROWS_AS(truncated_eig(Eigen::MatrixXd::Identity(3, 3), 4), std::invalid_argument);
}

TEST_CASE("truncated_eig agrees with a dense eigensolve") {
    Eigen::MatrixXd f = Eigen::MatrixXd::Random(6, 6);
    const Eigen::MatrixXd c = f * Eigen::VectorXd::LinSpaced(6, 3.0, 0.1).asDiagonal() * f.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(c);
    const auto dec = truncated_eig(c, 2);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(dec.eigvals[j] - full.eigenvalues()[5 - j]) < 1e-10);
        const Eigen::VectorXd v = full.eigenvectors().col(5 - j);
        CHECK(std::abs(std::abs(v.dot(dec.eigvecs.col(j))) - 1.0) < 1e-10);
    }
    CHECK(orthonormality_error(dec.eigvecs) < 1e-12);
    CHECK(std::abs(dec.trace() - c.trace()) < 1e-10);
}

TEST_CASE("projector_distance examples") {
    const Eigen::MatrixXd e1 = unit(3, 0), e2 = unit(3, 1);
    const Eigen::MatrixXd diag = (e1 + e2) / std::sqrt(2.0);
    CHECK(projector_distance(e1, e1) < 1e-15);
    CHECK(projector_distance(e1, e2) == doctest::Approx(1.0));
    CHECK(projector_distance(e1, diag) == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("orthonormal completion and subspace helpers") {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Random(5, 2).householderQr().householderQ() * Eigen::MatrixXd::Identity(5, 2);
    const Eigen::MatrixXd w = orthonormal_completion(u);
    REQUIRE(w.cols() == 3);
    CHECK(orthonormality_error(w) < 1e-12);
    CHECK((u.transpose() * w).lpNorm<Eigen::Infinity>() < 1e-12);

    const auto s = Subspace::coordinate(4, 2);
    CHECK(s.basis == Eigen::MatrixXd::Identity(4, 2));
    CHECK(s.leading(1).rank() == 1);
    CHECK_THROWS_AS(Subspace::from_basis(Eigen::MatrixXd::Ones(3, 1)), std::invalid_argument);

    Eigen::MatrixXd v(2, 2);
    v << -1, 0, 0, 1;
    normalize_signs(v);
    CHECK(v(0, 0) == 1.0);
}

TEST_CASE("SLAS on a linear model recovers span(c)") {
    Eigen::VectorXd c(6);
    c << 1, -2, 0.5, 0, 3, 1;
    const auto hier = linear_model(c);
    for (std::size_t m : {1u, 3u, 20u}) {
        const auto dec = slas_decomposition(hier, 0, 1, m, SeededStream{1, m});
        CHECK(projector_distance(dec.eigvecs, c.normalized()) < 1e-12);
        CHECK(std::abs(dec.eigvals[0] - c.squaredNorm()) < 1e-12 * c.squaredNorm());
    }
}

TEST_CASE("SLAS on a constant model: zero eigenvalues, orthonormal basis") {
    const CallableHierarchy hier(
        4, 0, [](int, const Eigen::VectorXd&) { return 2.0; },
        [](int, const Eigen::VectorXd& y) { return Eigen::VectorXd::Zero(y.size()); }, [](int) { return 1.0; });
    const auto dec = slas_decomposition(hier, 0, 3, 10, SeededStream{2, 0});
    CHECK(dec.eigvals.cwiseAbs().maxCoeff() == 0.0);
    CHECK(orthonormality_error(dec.eigvecs) < 1e-12);
}

TEST_CASE("ridge exactness for sin(c·y) and a rank-2 ridge") {
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(10, 1.0, 0.1);
    const CallableHierarchy sin_ridge(
        10, 0, [c](int, const Eigen::VectorXd& y) { return std::sin(c.dot(y)); },
        [c](int, const Eigen::VectorXd& y) { return Eigen::VectorXd(std::cos(c.dot(y)) * c); },
        [](int) { return 1.0; });
    WorkLedger ledger;
    const auto s = slas_subspace(sin_ridge, 0, 1, 200, SeededStream{3, 0}, &ledger);
    CHECK(projector_distance(s.basis, c.normalized()) < 0.05);
    CHECK(ledger.total() == doctest::Approx(200.0));

    // f(y) = exp(v₁·y) + (v₂·y)², rank 2 in d = 8; M = 20 ≥ 10k.
    Eigen::MatrixXd v = Eigen::MatrixXd::Random(8, 2);
    const Eigen::MatrixXd q = v.householderQr().householderQ() * Eigen::MatrixXd::Identity(8, 2);
    const CallableHierarchy ridge2(
        8, 0, [q](int, const Eigen::VectorXd& y) { return std::exp(q.col(0).dot(y)) + std::pow(q.col(1).dot(y), 2); },
        [q](int, const Eigen::VectorXd& y) {
            return Eigen::VectorXd(std::exp(q.col(0).dot(y)) * q.col(0) + 2.0 * q.col(1).dot(y) * q.col(1));
        },
        [](int) { return 1.0; });
    const auto dec = slas_decomposition(ridge2, 0, 4, 20, SeededStream{4, 0});
    CHECK(dec.eigvals[2] < 1e-12 * dec.eigvals[0]);
    CHECK(projector_distance(dec.eigvecs.leftCols(2), q) < 1e-8);
}

TEST_CASE("trace identity and monotone tails") {
    const Eigen::MatrixXd g = draw_gaussian(7, SeededStream{5, 0}, 30) * Eigen::VectorXd::LinSpaced(7, 2.0, 0.2).asDiagonal();
    const auto dec = gradient_decomposition(g, 7);
    CHECK(std::abs(dec.trace() - g.squaredNorm() / 30.0) < 1e-10);
    double prev = INFINITY;
    for (std::size_t r = 0; r <= 7; ++r) {
        CHECK(dec.tail(r) <= prev);
        prev = dec.tail(r);
    }
    CHECK(dec.tail(7) == 0.0);
}

TEST_CASE("snapshot route (M < d) agrees with the dense route") {
    const Eigen::MatrixXd g = draw_gaussian(12, SeededStream{6, 0}, 5);
    const auto snap = gradient_decomposition(g, 3);
    const auto dense = truncated_eig(sample_covariance(g), 3);
    CHECK((snap.eigvals - dense.eigvals).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(projector_distance(snap.eigvecs, dense.eigvecs) < 1e-8);
    CHECK(orthonormality_error(snap.eigvecs) < 1e-12);
    // Rank-deficient: 2 gradients, ask for 4 directions.
    const auto def = gradient_decomposition(g.topRows(2), 4);
    CHECK(def.rank() == 4);
    CHECK(orthonormality_error(def.eigvecs) < 1e-12);
    CHECK(def.eigvals[3] == 0.0);
}

TEST_CASE("Subspace JSON round trip") {
    const auto s = Subspace::from_basis(Eigen::MatrixXd::Identity(3, 2), Eigen::Vector2d(2.0, 0.5));
    const nlohmann::json j = s;
    const auto back = j.get<Subspace>();
    CHECK(back.basis == s.basis);
    CHECK(back.singular_values == s.singular_values);
    CHECK(matrix_from_json(matrix_to_json(Eigen::MatrixXd::Zero(0, 3))).cols() == 3);
}
