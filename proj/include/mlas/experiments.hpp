#pragma once

// Experiment harness behind the command-line tool: config validation,
// benchmark construction, the projection-error and complexity studies,
// fitting from a config, and surrogate evaluation on point files.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlas/hierarchy.hpp"
#include "mlas/mlas.hpp"

namespace mlas {

/// Invalid configuration; `path` is a JSON pointer to the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// The published config schema (a JSON Schema subset).
const nlohmann::json& config_schema();

/// Validates `doc` against `schema`; throws ConfigError at the first
/// violation. Supports type, enum, minimum, exclusiveMinimum, maximum,
/// required, properties, additionalProperties (false), items, minItems.
void validate_against(const nlohmann::json& schema, const nlohmann::json& doc, const std::string& path = "");
void validate_config(const nlohmann::json& config);

/// FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Closed-form hierarchy f_l(y) = c·y for every level, work(l) = 4^l.
std::unique_ptr<ModelHierarchy> make_linear_hierarchy(std::vector<double> c, int max_level);

/// Builds the hierarchy described by a validated "benchmark" block.
std::unique_ptr<ModelHierarchy> make_benchmark(const nlohmann::json& benchmark);

struct ProjectionRow {
    std::string target;  // "function" or "difference"
    int level = 0;
    std::size_t rank = 0;
    double tail_norm = 0.0;  // sqrt of the eigenvalue tail beyond rank
    std::size_t samples = 0;
};

/// Eigenvalue-tail norms of the gradient covariances of f_l and Δ_l. Both
/// targets at one level share the same M Gaussian points.
std::vector<ProjectionRow> projection_error(const ModelHierarchy& hier, const std::vector<int>& levels,
                                            const std::vector<std::size_t>& ranks, std::size_t m,
                                            const SeededStream& stream);

struct ComplexityRow {
    std::string method;  // slaspa, mlaspa, amlaspa, amlpa, aslaspa
    std::string params;
    int max_level = 0;
    double work = 0.0;
    double error = 0.0;
    double error_se = 0.0;
    double error_estimate = 0.0;  // the method's own estimate (adaptive methods), else 0
    bool partial = false;
};

struct ComplexityResult {
    std::vector<ComplexityRow> rows;
    std::vector<nlohmann::json> trace;  // adaptive runs, tagged with method and budget
};

ComplexityResult complexity_study(const ModelHierarchy& hier, const nlohmann::json& study, const SeededStream& stream);

/// For every Pareto-optimal row of `baseline` (an error target), the cheapest
/// row of `candidate` whose error is within 3 combined standard errors of
/// the target or below it; ratio = candidate work / baseline work.
struct MatchedWork {
    double target_error = 0.0;
    double baseline_work = 0.0;
    double candidate_work = 0.0;  // 0 when no candidate qualifies
    double ratio = 0.0;           // infinity when no candidate qualifies
    std::string baseline_params;
    std::string candidate_params;
};

std::vector<MatchedWork> matched_work(const std::vector<ComplexityRow>& rows, const std::string& baseline,
                                      const std::string& candidate);

/// Artifacts of one subcommand run; file name → contents.
struct RunOutput {
    std::vector<std::pair<std::string, std::string>> files;
    bool partial = false;
};

/// Applies the seed override (when given), validates, and runs.
RunOutput run_projection_error(nlohmann::json config, std::optional<std::uint64_t> seed = std::nullopt);
RunOutput run_complexity(nlohmann::json config, std::optional<std::uint64_t> seed = std::nullopt);
RunOutput run_fit(nlohmann::json config, std::optional<std::uint64_t> seed = std::nullopt);

/// Parses a CSV of points (one per row, optional header) and evaluates.
/// Output: a "value" header and one row per point.
std::string evaluate_surrogate(const MlasSurrogate& surr, const std::string& points_csv);

}  // namespace mlas
