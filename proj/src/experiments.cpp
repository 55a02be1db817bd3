#include "mlas/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mlas/adaptive.hpp"
#include "mlas/asm.hpp"
#include "mlas/lognormal_pde.hpp"

namespace mlas {

namespace {

constexpr const char* kSchema = R"json({
  "type": "object",
  "required": ["version", "benchmark"],
  "additionalProperties": false,
  "properties": {
    "version": {"type": "integer", "enum": [1]},
    "seed": {"type": "integer", "minimum": 0},
    "threads": {"type": "integer", "minimum": 1},
    "benchmark": {
      "type": "object",
      "required": ["type"],
      "additionalProperties": false,
      "properties": {
        "type": {"type": "string", "enum": ["lognormal", "linear"]},
        "d": {"type": "integer", "minimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "b_bar": {"type": "number"},
        "n0": {"type": "integer", "minimum": 2},
        "max_level": {"type": "integer", "minimum": 0, "maximum": 10},
        "gamma": {"type": "number", "exclusiveMinimum": 0},
        "forcing": {"type": "number"},
        "coefficients": {"type": "array", "minItems": 1, "items": {"type": "number"}}
      }
    },
    "projection_error": {
      "type": "object",
      "required": ["levels", "ranks", "M"],
      "additionalProperties": false,
      "properties": {
        "levels": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
        "ranks": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "M": {"type": "integer", "minimum": 1}
      }
    },
    "complexity": {
      "type": "object",
      "required": ["reference_level", "n_test"],
      "additionalProperties": false,
      "properties": {
        "reference_level": {"type": "integer", "minimum": 1},
        "n_test": {"type": "integer", "minimum": 2},
        "t": {"type": "number", "exclusiveMinimum": 0},
        "slaspa": {
          "type": "object",
          "required": ["levels", "ranks", "degrees"],
          "additionalProperties": false,
          "properties": {
            "levels": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
            "ranks": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
            "degrees": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
            "c_m": {"type": "number", "exclusiveMinimum": 1}
          }
        },
        "mlaspa": {
          "type": "object",
          "required": ["L", "r_base", "max_degree"],
          "additionalProperties": false,
          "properties": {
            "L": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
            "r_base": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
            "max_degree": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
            "rank_ratio": {"type": "number", "exclusiveMinimum": 1},
            "c_m": {"type": "number", "exclusiveMinimum": 1},
            "max_size": {"type": "integer", "minimum": 1}
          }
        },
        "amlaspa": {"$ref": "adaptive"},
        "amlpa": {"$ref": "adaptive"},
        "aslaspa": {"$ref": "adaptive"}
      }
    },
    "fit": {
      "type": "object",
      "required": ["method"],
      "additionalProperties": false,
      "properties": {
        "method": {"type": "string", "enum": ["mlaspa", "slaspa", "amlaspa", "amlpa"]},
        "t": {"type": "number", "exclusiveMinimum": 0},
        "c_m": {"type": "number", "exclusiveMinimum": 0},
        "L": {"type": "integer", "minimum": 0},
        "r_base": {"type": "integer", "minimum": 1},
        "rank_ratio": {"type": "number", "exclusiveMinimum": 1},
        "max_degree": {"type": "integer", "minimum": 0},
        "max_size": {"type": "integer", "minimum": 1},
        "level": {"type": "integer", "minimum": 0},
        "rank": {"type": "integer", "minimum": 1},
        "M": {"type": "integer", "minimum": 1},
        "degree": {"type": "integer", "minimum": 0},
        "budget": {"type": "number", "exclusiveMinimum": 0},
        "max_level": {"type": "integer", "minimum": 0}
      }
    }
  },
  "definitions": {
    "adaptive": {
      "type": "object",
      "required": ["budgets"],
      "additionalProperties": false,
      "properties": {
        "budgets": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
        "c_m": {"type": "number", "exclusiveMinimum": 0},
        "level": {"type": "integer", "minimum": 0},
        "max_set_size": {"type": "integer", "minimum": 2}
      }
    }
  }
})json";

std::string type_name(const nlohmann::json& v) {
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    return v.type_name();
}

bool has_type(const nlohmann::json& v, const std::string& t) {
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "array") return v.is_array();
    if (t == "object") return v.is_object();
    return false;
}

void validate_node(const nlohmann::json& root, const nlohmann::json& schema, const nlohmann::json& doc,
                   const std::string& path) {
    if (schema.contains("$ref")) {
        validate_node(root, root.at("definitions").at(schema.at("$ref").get<std::string>()), doc, path);
        return;
    }
    const std::string where = path.empty() ? "/" : path;
    if (schema.contains("type")) {
        const auto t = schema.at("type").get<std::string>();
        if (!has_type(doc, t)) throw ConfigError(where, "expected " + t + ", got " + type_name(doc));
    }
    if (schema.contains("enum")) {
        const auto& e = schema.at("enum");
        if (std::find(e.begin(), e.end(), doc) == e.end()) throw ConfigError(where, "value " + doc.dump() + " not allowed");
    }
    if (doc.is_number()) {
        const double x = doc.get<double>();
        if (schema.contains("minimum") && x < schema.at("minimum").get<double>()) {
            throw ConfigError(where, "must be >= " + schema.at("minimum").dump());
        }
        if (schema.contains("exclusiveMinimum") && !(x > schema.at("exclusiveMinimum").get<double>())) {
            throw ConfigError(where, "must be > " + schema.at("exclusiveMinimum").dump());
        }
        if (schema.contains("maximum") && x > schema.at("maximum").get<double>()) {
            throw ConfigError(where, "must be <= " + schema.at("maximum").dump());
        }
    }
    if (doc.is_object()) {
        for (const auto& req : schema.value("required", nlohmann::json::array())) {
            if (!doc.contains(req.get<std::string>())) {
                throw ConfigError(path + "/" + req.get<std::string>(), "required field missing");
            }
        }
        const auto props = schema.value("properties", nlohmann::json::object());
        for (const auto& [key, value] : doc.items()) {
            if (props.contains(key)) {
                validate_node(root, props.at(key), value, path + "/" + key);
            } else if (!schema.value("additionalProperties", true)) {
                throw ConfigError(path + "/" + key, "unknown field");
            }
        }
    }
    if (doc.is_array()) {
        if (schema.contains("minItems") && doc.size() < schema.at("minItems").get<std::size_t>()) {
            throw ConfigError(where, "needs at least " + schema.at("minItems").dump() + " items");
        }
        if (schema.contains("items")) {
            for (std::size_t i = 0; i < doc.size(); ++i) {
                validate_node(root, schema.at("items"), doc[i], path + "/" + std::to_string(i));
            }
        }
    }
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::size_t gradient_count(std::size_t r, double c_m) {
    const double rd = static_cast<double>(r);
    return std::max(r + 1, static_cast<std::size_t>(std::ceil(c_m * rd * std::log(rd + 1.0) - 1e-9)));
}

}  // namespace

const nlohmann::json& config_schema() {
    static const nlohmann::json schema = nlohmann::json::parse(kSchema);
    return schema;
}

void validate_against(const nlohmann::json& schema, const nlohmann::json& doc, const std::string& path) {
    validate_node(schema, schema, doc, path);
}

void validate_config(const nlohmann::json& config) {
    validate_against(config_schema(), config);
    const auto& b = config.at("benchmark");
    const int max_level = b.value("max_level", b.value("type", "") == "linear" ? 2 : 5);
    if (b.at("type") == "linear" && b.contains("coefficients") && b.contains("d") &&
        b.at("coefficients").size() != b.at("d").get<std::size_t>()) {
        throw ConfigError("/benchmark/coefficients", "length must equal d");
    }
    if (config.contains("projection_error")) {
        for (std::size_t i = 0; i < config["projection_error"]["levels"].size(); ++i) {
            if (config["projection_error"]["levels"][i].get<int>() > max_level) {
                throw ConfigError("/projection_error/levels/" + std::to_string(i), "exceeds benchmark max_level");
            }
        }
    }
    if (config.contains("complexity")) {
        const auto& c = config.at("complexity");
        const int ref = c.at("reference_level").get<int>();
        if (ref > max_level) throw ConfigError("/complexity/reference_level", "exceeds benchmark max_level");
        if (c.contains("slaspa")) {
            for (std::size_t i = 0; i < c["slaspa"]["levels"].size(); ++i) {
                if (c["slaspa"]["levels"][i].get<int>() >= ref) {
                    throw ConfigError("/complexity/slaspa/levels/" + std::to_string(i), "must be below reference_level");
                }
            }
        }
        if (c.contains("mlaspa")) {
            for (std::size_t i = 0; i < c["mlaspa"]["L"].size(); ++i) {
                if (c["mlaspa"]["L"][i].get<int>() >= ref) {
                    throw ConfigError("/complexity/mlaspa/L/" + std::to_string(i), "must be below reference_level");
                }
            }
        }
        if (c.contains("aslaspa") && c["aslaspa"].value("level", ref - 1) >= ref) {
            throw ConfigError("/complexity/aslaspa/level", "must be below reference_level");
        }
    }
}

std::string config_hash(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::unique_ptr<ModelHierarchy> make_linear_hierarchy(std::vector<double> c, int max_level) {
    const Eigen::VectorXd cv = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    return std::make_unique<CallableHierarchy>(
        c.size(), max_level, [cv](int, const Eigen::VectorXd& y) { return cv.dot(y); },
        [cv](int, const Eigen::VectorXd&) { return cv; }, [](int l) { return std::pow(4.0, l); });
}

std::unique_ptr<ModelHierarchy> make_benchmark(const nlohmann::json& b) {
    if (b.at("type") == "linear") {
        const auto d = b.value("d", std::size_t{10});
        std::vector<double> c;
        if (b.contains("coefficients")) {
            c = b.at("coefficients").get<std::vector<double>>();
        } else {
            for (std::size_t j = 1; j <= d; ++j) c.push_back(1.0 / static_cast<double>(j));
        }
        return make_linear_hierarchy(std::move(c), b.value("max_level", 2));
    }
    ExpansionConfig cfg = b.get<ExpansionConfig>();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("/benchmark", e.what());
    }
    return std::make_unique<LognormalPde>(cfg);
}

std::vector<ProjectionRow> projection_error(const ModelHierarchy& hier, const std::vector<int>& levels,
                                            const std::vector<std::size_t>& ranks, std::size_t m,
                                            const SeededStream& stream) {
    std::vector<ProjectionRow> rows;
    const std::size_t rmax = std::min(hier.dim(), *std::max_element(ranks.begin(), ranks.end()));
    for (int l : levels) {
        const Eigen::MatrixXd pts = draw_gaussian(hier.dim(), stream.child(static_cast<std::uint64_t>(l)), m);
        const Eigen::MatrixXd gf = gradient_batch(hier, l, Target::Function, pts);
        Eigen::MatrixXd gd = gf;
        if (l > 0) gd -= gradient_batch(hier, l - 1, Target::Function, pts);
        for (const char* target : {"function", "difference"}) {
            const SpectralDecomposition dec = gradient_decomposition(std::string(target) == "function" ? gf : gd, rmax);
            for (std::size_t r : ranks) {
                rows.push_back({target, l, r, std::sqrt(std::max(dec.tail(std::min(r, hier.dim())), 0.0)), m});
            }
        }
    }
    return rows;
}

ComplexityResult complexity_study(const ModelHierarchy& hier, const nlohmann::json& study, const SeededStream& stream) {
    ComplexityResult out;
    const int ref = study.at("reference_level").get<int>();
    const double t = study.value("t", 1.0);
    const TestSet test = make_test_set(hier, ref, study.at("n_test").get<std::size_t>(), stream.child(0));

    const auto add = [&](std::string method, std::string params, const MlasSurrogate& s, double estimate, bool partial) {
        const McEstimate e = mc_l2_error(s, test);
        out.rows.push_back({std::move(method), std::move(params), s.finest_level(), s.work.total(), e.value, e.std_error,
                            estimate, partial});
    };

    if (study.contains("slaspa")) {
        const auto& c = study.at("slaspa");
        const double c_m = c.value("c_m", 2.0);
        std::uint64_t run = 0;
        for (int l : c.at("levels").get<std::vector<int>>()) {
            for (std::size_t r : c.at("ranks").get<std::vector<std::size_t>>()) {
                for (unsigned p : c.at("degrees").get<std::vector<unsigned>>()) {
                    if (r > hier.dim()) continue;
                    const auto s = slaspa_fit(hier, l, r, gradient_count(r, c_m), p, t, stream.child(1).child(run++));
                    add("slaspa", "level=" + std::to_string(l) + ";rank=" + std::to_string(r) + ";degree=" + std::to_string(p),
                        s, 0.0, false);
                }
            }
        }
    }
    if (study.contains("mlaspa")) {
        const auto& c = study.at("mlaspa");
        const double ratio = c.value("rank_ratio", 2.0);
        const double c_m = c.value("c_m", 2.0);
        const auto max_size = c.value("max_size", std::numeric_limits<std::size_t>::max());
        std::uint64_t run = 0;
        for (int L : c.at("L").get<std::vector<int>>()) {
            for (std::size_t rb : c.at("r_base").get<std::vector<std::size_t>>()) {
                for (unsigned p : c.at("max_degree").get<std::vector<unsigned>>()) {
                    const std::uint64_t id = run++;
                    MultilevelPlan plan;
                    try {
                        plan = geometric_plan(L, rb, ratio, c_m, IndexSetRule{p, max_size});
                    } catch (const std::invalid_argument&) {
                        continue;  // e.g. degree 0 gives non-increasing poly dims
                    }
                    if (plan.ranks.back() > hier.dim()) continue;
                    const auto s = mlaspa_fit(hier, plan, t, stream.child(2).child(id));
                    add("mlaspa", "L=" + std::to_string(L) + ";r_base=" + std::to_string(rb) + ";max_degree=" + std::to_string(p),
                        s, 0.0, false);
                }
            }
        }
    }
    const auto adaptive = [&](const char* method, std::uint64_t tag, bool identity, const nlohmann::json& c) {
        std::unique_ptr<FixedLevelHierarchy> single;
        const ModelHierarchy* h = &hier;
        AmlaspaOptions opts;
        opts.t = t;
        opts.c_m = c.value("c_m", 2.0);
        opts.identity_subspace = identity;
        opts.poly.max_set_size = c.value("max_set_size", opts.poly.max_set_size);
        if (std::string(method) == "aslaspa") {
            single = std::make_unique<FixedLevelHierarchy>(hier, c.value("level", ref - 1));
            h = single.get();
        } else {
            opts.max_level = ref - 1;
        }
        for (double budget : c.at("budgets").get<std::vector<double>>()) {
            opts.work_budget = budget;
            const AmlaspaResult r = amlaspa(*h, opts, stream.child(tag));
            MlasSurrogate s = r.surrogate;
            if (single) {
                // Relabel the single level so the test error is taken against the reference.
                for (auto& lv : s.levels) lv.level = c.value("level", ref - 1);
            }
            add(method, "budget=" + fmt(budget), s, r.error_estimate, r.partial);
            for (auto rec : r.trace) {
                rec["method"] = method;
                rec["budget"] = budget;
                out.trace.push_back(std::move(rec));
            }
        }
    };
    if (study.contains("amlaspa")) adaptive("amlaspa", 3, false, study.at("amlaspa"));
    if (study.contains("amlpa")) adaptive("amlpa", 4, true, study.at("amlpa"));
    if (study.contains("aslaspa")) adaptive("aslaspa", 5, false, study.at("aslaspa"));
    return out;
}

std::vector<MatchedWork> matched_work(const std::vector<ComplexityRow>& rows, const std::string& baseline,
                                      const std::string& candidate) {
    std::vector<const ComplexityRow*> base, cand;
    for (const auto& r : rows) {
        if (r.method == baseline) base.push_back(&r);
        if (r.method == candidate) cand.push_back(&r);
    }
    std::sort(base.begin(), base.end(), [](auto* a, auto* b) {
        return a->work != b->work ? a->work < b->work : a->error < b->error;
    });
    std::vector<MatchedWork> out;
    double best = std::numeric_limits<double>::infinity();
    for (const auto* b : base) {
        if (!(b->error < best)) continue;  // not Pareto-optimal
        best = b->error;
        MatchedWork m;
        m.target_error = b->error;
        m.baseline_work = b->work;
        m.baseline_params = b->params;
        m.ratio = std::numeric_limits<double>::infinity();
        for (const auto* c : cand) {
            const double band = 3.0 * std::hypot(b->error_se, c->error_se);
            if (c->error <= b->error + band && (m.candidate_work == 0.0 || c->work < m.candidate_work)) {
                m.candidate_work = c->work;
                m.candidate_params = c->params;
                m.ratio = c->work / b->work;
            }
        }
        out.push_back(m);
    }
    return out;
}

namespace {

std::uint64_t apply_seed(nlohmann::json& config, std::optional<std::uint64_t> seed) {
    if (seed) config["seed"] = *seed;
    validate_config(config);
    return config.value("seed", std::uint64_t{0});
}

}  // namespace

RunOutput run_projection_error(nlohmann::json config, std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = apply_seed(config, seed_override);
    if (!config.contains("projection_error")) throw ConfigError("/projection_error", "required for this study");
    const std::string hash = config_hash(config);
    const auto hier = make_benchmark(config.at("benchmark"));
    const auto& pe = config.at("projection_error");
    const auto rows = projection_error(*hier, pe.at("levels").get<std::vector<int>>(),
                                       pe.at("ranks").get<std::vector<std::size_t>>(), pe.at("M").get<std::size_t>(),
                                       SeededStream{seed, 1});
    std::ostringstream csv;
    csv << "target,level,rank,tail_norm,M,seed,config_hash\n";
    for (const auto& r : rows) {
        csv << r.target << ',' << r.level << ',' << r.rank << ',' << fmt(r.tail_norm) << ',' << r.samples << ','
            << seed << ',' << hash << '\n';
    }
    return {{{"projection_error.csv", csv.str()}}, false};
}

RunOutput run_complexity(nlohmann::json config, std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = apply_seed(config, seed_override);
    if (!config.contains("complexity")) throw ConfigError("/complexity", "required for this study");
    const std::string hash = config_hash(config);
    const auto hier = make_benchmark(config.at("benchmark"));
    const ComplexityResult res = complexity_study(*hier, config.at("complexity"), SeededStream{seed, 2});
    RunOutput out;
    std::ostringstream csv;
    csv << "method,params,max_level,work,error,error_se,error_estimate,partial,seed,config_hash\n";
    for (const auto& r : res.rows) {
        csv << r.method << ',' << r.params << ',' << r.max_level << ',' << fmt(r.work) << ',' << fmt(r.error) << ','
            << fmt(r.error_se) << ',' << fmt(r.error_estimate) << ',' << (r.partial ? 1 : 0) << ',' << seed << ','
            << hash << '\n';
        out.partial = out.partial || r.partial;
    }
    out.files.emplace_back("complexity.csv", csv.str());
    std::ostringstream trace;
    for (auto rec : res.trace) {
        rec["seed"] = seed;
        rec["config_hash"] = hash;
        trace << rec.dump() << '\n';
    }
    out.files.emplace_back("trace.jsonl", trace.str());
    return out;
}

RunOutput run_fit(nlohmann::json config, std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = apply_seed(config, seed_override);
    if (!config.contains("fit")) throw ConfigError("/fit", "required for this command");
    const std::string hash = config_hash(config);
    const auto hier = make_benchmark(config.at("benchmark"));
    const auto& f = config.at("fit");
    const std::string method = f.at("method").get<std::string>();
    const double t = f.value("t", 1.0);
    const SeededStream stream{seed, 3};

    RunOutput out;
    MlasSurrogate surr;
    std::vector<nlohmann::json> trace;
    if (method == "mlaspa") {
        const int L = f.value("L", 0);
        if (L > hier->max_level()) throw ConfigError("/fit/L", "exceeds benchmark max_level");
        MultilevelPlan plan;
        try {
            plan = geometric_plan(L, f.value("r_base", std::size_t{1}), f.value("rank_ratio", 2.0), f.value("c_m", 2.0),
                                  IndexSetRule{f.value("max_degree", 2u), f.value("max_size", std::numeric_limits<std::size_t>::max())});
        } catch (const std::invalid_argument& e) {
            throw ConfigError("/fit", e.what());
        }
        if (plan.ranks.back() > hier->dim()) throw ConfigError("/fit/r_base", "plan ranks exceed the dimension");
        surr = mlaspa_fit(*hier, plan, t, stream);
    } else if (method == "slaspa") {
        const int level = f.value("level", 0);
        const auto rank = f.value("rank", std::size_t{1});
        if (level > hier->max_level()) throw ConfigError("/fit/level", "exceeds benchmark max_level");
        if (rank > hier->dim()) throw ConfigError("/fit/rank", "exceeds the dimension");
        surr = slaspa_fit(*hier, level, rank, f.value("M", gradient_count(rank, f.value("c_m", 2.0))),
                          f.value("degree", 1u), t, stream);
    } else {
        if (!f.contains("budget")) throw ConfigError("/fit/budget", "required for adaptive methods");
        AmlaspaOptions opts;
        opts.work_budget = f.at("budget").get<double>();
        opts.c_m = f.value("c_m", 2.0);
        opts.t = t;
        opts.identity_subspace = method == "amlpa";
        opts.max_level = f.value("max_level", -1);
        const AmlaspaResult r = amlaspa(*hier, opts, stream);
        surr = r.surrogate;
        out.partial = r.partial;
        for (auto rec : r.trace) {
            rec["seed"] = seed;
            rec["config_hash"] = hash;
            trace.push_back(std::move(rec));
        }
    }
    out.files.emplace_back("surrogate.json", nlohmann::json(surr).dump(1) + "\n");
    std::ostringstream summary;
    summary << "method,levels,work,seed,config_hash\n"
            << method << ',' << surr.levels.size() << ',' << fmt(surr.work.total()) << ',' << seed << ',' << hash << '\n';
    out.files.emplace_back("fit_summary.csv", summary.str());
    if (!trace.empty()) {
        std::ostringstream os;
        write_trace(os, trace);
        out.files.emplace_back("trace.jsonl", os.str());
    }
    return out;
}

std::string evaluate_surrogate(const MlasSurrogate& surr, const std::string& points_csv) {
    std::ostringstream out;
    out << "value\n";
    std::istringstream in(points_csv);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (lineno == 1) continue;  // header
            throw std::invalid_argument("points: line " + std::to_string(lineno) + " is not numeric");
        }
        if (vals.size() != surr.dim) {
            throw std::invalid_argument("points: line " + std::to_string(lineno) + " has " + std::to_string(vals.size()) +
                                        " coordinates, surrogate expects " + std::to_string(surr.dim));
        }
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        out << fmt(surr.evaluate(y)) << '\n';
    }
    return out.str();
}

}  // namespace mlas
