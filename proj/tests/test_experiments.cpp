#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mlas/experiments.hpp"
#include "mlas/lognormal_pde.hpp"

using namespace mlas;
using nlohmann::json;

namespace {

json linear_config() {
    return json::parse(R"({
      "version": 1, "seed": 5,
      "benchmark": {"type": "linear", "d": 4, "coefficients": [1.0, -0.5, 0.25, 2.0], "max_level": 2},
      "projection_error": {"levels": [0, 1], "ranks": [1, 2], "M": 6},
      "fit": {"method": "mlaspa", "L": 1, "r_base": 1, "max_degree": 1}
    })");
}

std::string error_path(const json& cfg) {
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<valid>";
}

std::string file(const RunOutput& out, const std::string& name) {
    for (const auto& [n, c] : out.files) {
        if (n == name) return c;
    }
    FAIL("missing output " << name);
    return {};
}

}  // namespace

TEST_CASE("schema accepts a valid config and reports field paths") {
    CHECK(error_path(linear_config()) == "<valid>");

    json c = linear_config();
    c["version"] = 2;
    CHECK(error_path(c) == "/version");
    c = linear_config();
    c["benchmark"]["alpha"] = -1.0;
    CHECK(error_path(c) == "/benchmark/alpha");
    c = linear_config();
    c["projection_error"]["ranks"][1] = 0;
    CHECK(error_path(c) == "/projection_error/ranks/1");
    c = linear_config();
    c["unknown"] = true;
    CHECK(error_path(c) == "/unknown");
    c = linear_config();
    c.erase("benchmark");
    CHECK(error_path(c).rfind("/benchmark", 0) == 0);
    c = linear_config();
    c["benchmark"]["coefficients"] = json::array({1.0});
    CHECK(error_path(c) == "/benchmark/coefficients");
    c = linear_config();
    c["projection_error"]["levels"] = json::array({3});
    CHECK(error_path(c) == "/projection_error/levels/0");
    c = linear_config();
    c["complexity"] = {{"reference_level", 2}, {"n_test", 10}, {"amlaspa", {{"budgets", json::array({-1.0})}}}};
    CHECK(error_path(c) == "/complexity/amlaspa/budgets/0");
    c = linear_config();
    c["seed"] = "five";
    CHECK(error_path(c) == "/seed");
}

TEST_CASE("config hash is stable and content-sensitive") {
    const json a = linear_config();
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) == config_hash(json::parse(a.dump())));
    json b = a;
    b["seed"] = 6;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("projection error: constant gradient has zero tail") {
    const auto hier = make_linear_hierarchy({1.0, 2.0, -1.0}, 2);
    const auto rows = projection_error(*hier, {0, 1, 2}, {1, 2}, 5, SeededStream{1, 0});
    CHECK(rows.size() == 3 * 2 * 2);
    for (const auto& r : rows) {
        CHECK(r.tail_norm == 0.0);
        CHECK(r.samples == 5);
    }
}

TEST_CASE("projection error tails are nonincreasing in rank") {
    ExpansionConfig cfg;
    cfg.d = 8;
    cfg.max_level = 2;
    const LognormalPde pde(cfg);
    const auto rows = projection_error(pde, {0, 1}, {1, 2, 4, 8}, 30, SeededStream{2, 0});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].target == rows[i - 1].target && rows[i].level == rows[i - 1].level) {
            CHECK(rows[i].tail_norm <= rows[i - 1].tail_norm);
        }
    }
    CHECK(rows.back().tail_norm == 0.0);  // rank 8 = d
}

TEST_CASE("matched work picks the cheapest qualifying candidate per Pareto target") {
    std::vector<ComplexityRow> rows{
        {"slaspa", "a", 1, 10.0, 0.5, 0.0, 0.0, false}, {"slaspa", "b", 2, 40.0, 0.2, 0.0, 0.0, false},
        {"slaspa", "c", 2, 50.0, 0.3, 0.0, 0.0, false},  // dominated
        {"mlaspa", "x", 2, 5.0, 0.45, 0.0, 0.0, false},  {"mlaspa", "y", 2, 30.0, 0.19, 0.0, 0.0, false},
        {"mlaspa", "z", 2, 20.0, 0.6, 0.0, 0.0, false},
    };
    const auto m = matched_work(rows, "slaspa", "mlaspa");
    REQUIRE(m.size() == 2);
    CHECK(m[0].baseline_params == "a");
    CHECK(m[0].candidate_params == "x");
    CHECK(m[0].ratio == doctest::Approx(0.5));
    CHECK(m[1].candidate_params == "y");
    CHECK(m[1].ratio == doctest::Approx(0.75));

    rows[4].error = 0.25;
    rows[4].error_se = 0.02;  // within 3σ of 0.2
    CHECK(matched_work(rows, "slaspa", "mlaspa")[1].candidate_params == "y");
    rows[4].error_se = 0.01;
    const auto none = matched_work(rows, "slaspa", "mlaspa");
    CHECK(std::isinf(none[1].ratio));
    CHECK(none[1].candidate_work == 0.0);
}

TEST_CASE("complexity study: one method, one budget gives one row") {
    const auto hier = make_linear_hierarchy({1.0, 0.5, 0.25}, 2);
    const json study = json::parse(R"({"reference_level": 2, "n_test": 50, "amlaspa": {"budgets": [200]}})");
    const auto res = complexity_study(*hier, study, SeededStream{3, 0});
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].method == "amlaspa");
    CHECK(res.rows[0].work > 0.0);
    CHECK(res.rows[0].error < 1e-8);
    CHECK_FALSE(res.trace.empty());
}

TEST_CASE("runs are reproducible and honor the seed override") {
    const json cfg = linear_config();
    const auto a = run_projection_error(cfg);
    const auto b = run_projection_error(cfg);
    CHECK(file(a, "projection_error.csv") == file(b, "projection_error.csv"));
    const auto f1 = run_fit(cfg);
    const auto f2 = run_fit(cfg);
    CHECK(file(f1, "surrogate.json") == file(f2, "surrogate.json"));
    const auto f3 = run_fit(cfg, 99);
    CHECK(file(f3, "fit_summary.csv").find(",99,") != std::string::npos);
    CHECK_THROWS_AS(run_fit(json{{"version", 1}, {"benchmark", {{"type", "linear"}}}}), ConfigError);
}

TEST_CASE("evaluate_surrogate") {
    const auto out = run_fit(linear_config());
    const auto surr = json::parse(file(out, "surrogate.json")).get<MlasSurrogate>();
    CHECK(evaluate_surrogate(surr, "") == "value\n");
    CHECK(evaluate_surrogate(surr, "y1,y2,y3,y4\n") == "value\n");

    const std::string csv = "y1,y2,y3,y4\n0.5,-1,2,0.25\n1,1,1,1\n";
    std::istringstream lines(evaluate_surrogate(surr, csv));
    std::string header, v1, v2;
    std::getline(lines, header);
    std::getline(lines, v1);
    std::getline(lines, v2);
    CHECK(header == "value");
    CHECK(std::abs(std::stod(v1) - (0.5 + 0.5 + 0.5 + 0.5)) < 1e-8);
    CHECK(std::abs(std::stod(v2) - 2.75) < 1e-8);

    // The saved JSON reproduces in-memory evaluation bit for bit.
    const auto reparsed = json::parse(nlohmann::json(surr).dump()).get<MlasSurrogate>();
    CHECK(evaluate_surrogate(reparsed, csv) == evaluate_surrogate(surr, csv));

    CHECK_THROWS_AS(evaluate_surrogate(surr, "1,2,3\n"), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_surrogate(surr, "1,2,3,4\nx,y,z,w\n"), std::invalid_argument);
}
