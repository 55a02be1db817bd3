#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "mlas/polyspace.hpp"
#include "oracles.hpp"

using namespace mlas;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

MultiIndex mi(std::vector<unsigned> d) { return MultiIndex::from_dense(d); }

std::vector<Big> hermite_big(int nmax, const Big& x) {
    std::vector<Big> h(static_cast<std::size_t>(nmax) + 1);
    h[0] = 1;
    if (nmax >= 1) h[1] = x;
    for (int n = 1; n < nmax; ++n) {
        h[static_cast<std::size_t>(n + 1)] =
            (x * h[static_cast<std::size_t>(n)] - sqrt(Big(n)) * h[static_cast<std::size_t>(n - 1)]) / sqrt(Big(n + 1));
    }
    return h;
}

// Every index with entries <= bound in `dim` coordinates.
std::vector<MultiIndex> box(std::size_t dim, unsigned bound) {
    std::vector<MultiIndex> out;
    std::vector<unsigned> d(dim, 0);
    while (true) {
        out.push_back(MultiIndex::from_dense(d));
        std::size_t j = 0;
        while (j < dim && d[j] == bound) d[j++] = 0;
        if (j == dim) break;
        ++d[j];
    }
    return out;
}

std::vector<MultiIndex> brute_margin(const MultiIndexSet& s) {
    unsigned bound = 0;
    for (std::size_t j = 0; j < s.dim(); ++j) bound = std::max(bound, s.max_degree(j));
    std::vector<MultiIndex> out;
    for (const auto& nu : box(s.dim(), bound + 1)) {
        if (s.contains(nu)) continue;
        bool ok = true;
        for (std::uint32_t j = 0; j < s.dim(); ++j) {
            if (auto dn = nu.decremented(j); dn && !s.contains(*dn)) ok = false;
        }
        if (ok) out.push_back(nu);
    }
    std::sort(out.begin(), out.end());
    return out;
}

MultiIndexSet random_set(std::mt19937_64& rng) {
    const std::size_t dim = 1 + rng() % 4;
    std::vector<MultiIndex> idx{MultiIndex{}};
    const std::size_t target = 1 + rng() % 25;
    while (idx.size() < target) {
        const auto m = reduced_margin(dim, idx);
        idx.push_back(m[rng() % m.size()]);
    }
    return MultiIndexSet(dim, idx);
}

}  // namespace

TEST_CASE("hermite_eval_all: small examples") {
    const auto h0 = hermite_eval_all(0, 3.7);
    REQUIRE(h0.size() == 1);
    CHECK(h0[0] == 1.0);
    const auto h2 = hermite_eval_all(2, 1.0);
    CHECK(h2[0] == doctest::Approx(1.0));
    CHECK(h2[1] == doctest::Approx(1.0));
    CHECK(std::abs(h2[2]) < 1e-15);
}

TEST_CASE("hermite_eval_all: explicit monomial formulas at x = 0.5") {
    const auto h = hermite_eval_all(6, 0.5);
    for (int n = 0; n <= 6; ++n) CHECK(std::abs(h[static_cast<std::size_t>(n)] - oracle::hermite_explicit(n, 0.5)) < 1e-12);
}

TEST_CASE("hermite_eval_all: rejects non-finite input") {
    CHECK_THROWS_AS(hermite_eval_all(3, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(hermite_eval_all(3, INFINITY), std::invalid_argument);
}

TEST_CASE("hermite_eval_into matches hermite_eval_all") {
    std::vector<double> buf(9);
    hermite_eval_into(-1.3, buf);
    const auto ref = hermite_eval_all(8, -1.3);
    for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i] == ref[i]);
}

TEST_CASE("orthonormality under 64-node Gauss-Hermite quadrature") {
    const auto [x, w] = oracle::gauss_hermite(64);
    double worst = 0.0;
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            double s = 0.0;
            for (Eigen::Index q = 0; q < x.size(); ++q) {
                const auto h = hermite_eval_all(10, x[q]);
                s += w[q] * h[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(j)];
            }
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("recurrence agrees with a 50-digit reference for n <= 50, |x| <= 8") {
    double worst = 0.0;
    for (int k = 0; k <= 32; ++k) {
        const double x = -8.0 + 0.5 * k + 0.0123;
        const auto h = hermite_eval_all(50, x);
        const auto ref = hermite_big(50, Big(x));
        double envelope = 0.0;
        for (int n = 0; n <= 50; ++n) {
            envelope = std::max(envelope, std::abs(ref[static_cast<std::size_t>(n)].convert_to<double>()));
            REQUIRE(std::isfinite(h[static_cast<std::size_t>(n)]));
            const double err = std::abs(h[static_cast<std::size_t>(n)] - ref[static_cast<std::size_t>(n)].convert_to<double>());
            worst = std::max(worst, err / envelope);
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("MultiIndex canonical sparse form") {
    const MultiIndex a = mi({0, 2, 0, 3, 0, 0});
    CHECK(a.support_dim() == 4);
    CHECK(a.total_degree() == 5);
    CHECK(a[1] == 2);
    CHECK(a[7] == 0);
    CHECK(a == MultiIndex::from_entries({{3, 3}, {1, 2}}));
    CHECK(a.to_dense(5) == std::vector<unsigned>{0, 2, 0, 3, 0});
    CHECK(MultiIndex::from_dense(std::vector<unsigned>{0, 0}).is_zero());
    CHECK_THROWS_AS(MultiIndex::from_entries({{1, 1}, {1, 2}}), std::invalid_argument);
    CHECK(!MultiIndex{}.decremented(0).has_value());
    CHECK(a.incremented(0) == mi({1, 2, 0, 3}));
}

TEST_CASE("tensor_eval") {
    const std::vector<double> x{0.3, -1.1};
    CHECK(tensor_eval(MultiIndex{}, x) == 1.0);
    CHECK(tensor_eval(mi({1, 1}), x) == doctest::Approx(0.3 * -1.1).epsilon(1e-15));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    const std::vector<double> z{n01(rng), n01(rng), n01(rng)};
    const double ref = hermite_eval_all(2, z[0])[2] * hermite_eval_all(3, z[2])[3];
    CHECK(std::abs(tensor_eval(mi({2, 0, 3}), z) - ref) < 1e-12);
    CHECK_THROWS_AS(tensor_eval(mi({0, 0, 1}), x), std::invalid_argument);
}

TEST_CASE("is_downward_closed examples") {
    const std::vector<MultiIndex> a{MultiIndex{}};
    const std::vector<MultiIndex> b{MultiIndex{}, mi({1}), mi({0, 1})};
    const std::vector<MultiIndex> c{mi({2})};
    CHECK(is_downward_closed(a));
    CHECK(is_downward_closed(b));
    CHECK_FALSE(is_downward_closed(c));
}

TEST_CASE("reduced_margin examples") {
    CHECK(reduced_margin(MultiIndexSet::zero(1)) == std::vector<MultiIndex>{mi({1})});
    auto m2 = reduced_margin(MultiIndexSet::zero(2));
    std::sort(m2.begin(), m2.end());
    std::vector<MultiIndex> e2{mi({1, 0}), mi({0, 1})};
    std::sort(e2.begin(), e2.end());
    CHECK(m2 == e2);

    const MultiIndexSet s(2, {MultiIndex{}, mi({1}), mi({0, 1})});
    auto m = reduced_margin(s);
    std::sort(m.begin(), m.end());
    CHECK(m == brute_margin(s));
    std::vector<MultiIndex> expected{mi({2}), mi({1, 1}), mi({0, 2})};
    std::sort(expected.begin(), expected.end());
    CHECK(m == expected);

    const std::vector<MultiIndex> bad{mi({2})};
    CHECK_THROWS_AS(reduced_margin(1, bad), std::invalid_argument);
}

TEST_CASE("property: margin matches brute force and keeps sets downward-closed (200 random sets)") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const MultiIndexSet s = random_set(rng);
        auto m = reduced_margin(s);
        std::sort(m.begin(), m.end());
        REQUIRE(m == brute_margin(s));
        std::vector<MultiIndex> all = s.indices();
        all.insert(all.end(), m.begin(), m.end());
        CHECK(is_downward_closed(all));
        for (const auto& nu : m) {
            std::vector<MultiIndex> one = s.indices();
            one.push_back(nu);
            CHECK(is_downward_closed(one));
        }
    }
}

TEST_CASE("MultiIndexSet validation and queries") {
    CHECK_THROWS_AS(MultiIndexSet(1, {mi({2})}), std::invalid_argument);
    CHECK_THROWS_AS(MultiIndexSet(1, {MultiIndex{}, mi({0, 1})}), std::invalid_argument);
    CHECK_THROWS_AS(MultiIndexSet(1, {MultiIndex{}, MultiIndex{}}), std::invalid_argument);

    const auto td = MultiIndexSet::total_degree(3, 2);
    CHECK(td.size() == 10);
    CHECK(total_degree_size(3, 2) == 10);
    CHECK(total_degree_size(2, 4) == 15);
    CHECK(td[0].is_zero());
    for (std::size_t i = 1; i < td.size(); ++i) CHECK(td[i - 1].total_degree() <= td[i].total_degree());
    CHECK(td.contains(mi({1, 0, 1})));
    CHECK(td.find(mi({0, 2})).has_value());
    CHECK_FALSE(td.find(mi({0, 3})).has_value());
    CHECK(td.max_degree(2) == 2);

    const auto wider = td.with_dim(5);
    CHECK(wider.dim() == 5);
    CHECK(wider.size() == td.size());
    const std::vector<MultiIndex> extra{mi({0, 0, 0, 1})};
    const auto grown = wider.with_added(extra);
    CHECK(grown.size() == td.size() + 1);
}

TEST_CASE("basis matrix, evaluation and Christoffel sum agree") {
    const auto set = MultiIndexSet::total_degree(2, 3);
    Eigen::MatrixXd pts(3, 2);
    pts << 0.1, -0.4, 1.5, 0.2, -2.0, 0.7;
    const Eigen::MatrixXd b = set.basis_matrix(pts);
    REQUIRE(b.rows() == 3);
    REQUIRE(b.cols() == static_cast<Eigen::Index>(set.size()));
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(set.size()), -1.0, 1.0);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const std::vector<double> x{pts(i, 0), pts(i, 1)};
        double direct = 0.0, sq = 0.0;
        for (std::size_t k = 0; k < set.size(); ++k) {
            const double h = tensor_eval(set[k], x);
            CHECK(std::abs(b(i, static_cast<Eigen::Index>(k)) - h) < 1e-14);
            direct += c[static_cast<Eigen::Index>(k)] * h;
            sq += h * h;
        }
        CHECK(std::abs(set.evaluate(std::span<const double>(c.data(), set.size()), x) - direct) < 1e-13);
        CHECK(std::abs(set.christoffel_sum(x) - sq) < 1e-12 * sq);
    }
}

TEST_CASE("JSON round trip of index sets") {
    const auto set = MultiIndexSet::total_degree(3, 2).with_added(std::vector<MultiIndex>{mi({3})});
    const nlohmann::json j = set;
    CHECK(j.at("indices").is_array());
    const auto back = j.get<MultiIndexSet>();
    CHECK(back.dim() == set.dim());
    CHECK(back.indices() == set.indices());
    nlohmann::json bad = j;
    bad["indices"].push_back(nlohmann::json::array({nlohmann::json::array({0, 7})}));
    CHECK_THROWS(bad.get<MultiIndexSet>());
}
