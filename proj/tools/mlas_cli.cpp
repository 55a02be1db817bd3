// mlas: command-line front end for the experiment harness.
//
//   mlas projection-error --config cfg.json --out dir [--seed N] [--threads N]
//   mlas complexity       --config cfg.json --out dir [--seed N] [--threads N]
//   mlas fit              --config cfg.json --out dir [--seed N] [--threads N]
//   mlas eval             --surrogate s.json --points p.csv --out dir
//   mlas schema
//
// Exit codes: 0 success, 1 other failure, 2 config error, 3 conditioning
// failure, 4 budget exhausted with partial output.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlas/experiments.hpp"
#include "mlas/lstsq.hpp"
#include "mlas/parallel.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kConfig = 2, kNumerical = 3, kPartial = 4 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_outputs(const fs::path& dir, const mlas::RunOutput& out) {
    fs::create_directories(dir);
    for (const auto& [name, contents] : out.files) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        os << contents;
        std::cout << (dir / name).string() << '\n';
    }
}

nlohmann::json load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw mlas::ConfigError("/", e.what());
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw mlas::ConfigError("/", std::string("not valid JSON: ") + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel active subspace approximation: studies, fitting and evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", surrogate_path, points_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads for model evaluations");
    };
    auto* pe = app.add_subcommand("projection-error", "eigenvalue-tail study of f_l and its differences");
    add_common(pe);
    auto* cx = app.add_subcommand("complexity", "work versus error of single-level, multilevel and adaptive methods");
    add_common(cx);
    auto* fit = app.add_subcommand("fit", "fit a surrogate (mlaspa, slaspa, amlaspa, amlpa) and save it");
    add_common(fit);
    auto* ev = app.add_subcommand("eval", "evaluate a saved surrogate at points from a CSV file");
    ev->add_option("--surrogate", surrogate_path, "surrogate JSON from `fit`")->required();
    ev->add_option("--points", points_path, "CSV with one point per row")->required();
    ev->add_option("--out", out_dir, "output directory");
    ev->add_option("--threads", threads, "unused; accepted for uniformity");
    auto* schema = app.add_subcommand("schema", "print the config schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        if (schema->parsed()) {
            std::cout << mlas::config_schema().dump(2) << '\n';
            return kOk;
        }
        if (ev->parsed()) {
            mlas::MlasSurrogate surr;
            try {
                surr = nlohmann::json::parse(read_file(surrogate_path)).get<mlas::MlasSurrogate>();
            } catch (const nlohmann::json::exception& e) {
                throw mlas::ConfigError("/surrogate", e.what());
            } catch (const std::invalid_argument& e) {
                throw mlas::ConfigError("/surrogate", e.what());
            }
            std::string values;
            try {
                values = mlas::evaluate_surrogate(surr, read_file(points_path));
            } catch (const std::invalid_argument& e) {
                throw mlas::ConfigError("/points", e.what());
            }
            write_outputs(out_dir, {{{"values.csv", values}}, false});
            return kOk;
        }

        nlohmann::json config = load_config(config_path);
        if (threads == 0 && config.is_object() && config.contains("threads") && config["threads"].is_number_unsigned()) {
            threads = config["threads"].get<unsigned>();
        }
        mlas::set_thread_count(threads == 0 ? 1 : threads);

        mlas::RunOutput out;
        if (pe->parsed()) out = mlas::run_projection_error(config, seed);
        if (cx->parsed()) out = mlas::run_complexity(config, seed);
        if (fit->parsed()) out = mlas::run_fit(config, seed);
        write_outputs(out_dir, out);
        return out.partial ? kPartial : kOk;
    } catch (const mlas::ConfigError& e) {
        std::cerr << "config error at " << e.what() << '\n';
        return kConfig;
    } catch (const mlas::ConditioningError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
