#include "mlas/mlas.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlas {

double LevelSurrogate::evaluate(const Eigen::VectorXd& y) const {
    if (y.size() != subspace.basis.rows()) throw std::invalid_argument("LevelSurrogate: point dimension mismatch");
    const Eigen::VectorXd x = subspace.basis.transpose() * y;
    return index_set.evaluate(std::span<const double>(coeffs.data(), static_cast<std::size_t>(coeffs.size())),
                              std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double MlasSurrogate::evaluate(const Eigen::VectorXd& y) const {
    if (static_cast<std::size_t>(y.size()) != dim) throw std::invalid_argument("MlasSurrogate: point dimension mismatch");
    double s = 0.0;
    for (const auto& lv : levels) s += lv.evaluate(y);
    return s;
}

Eigen::VectorXd MlasSurrogate::evaluate_batch(const Eigen::MatrixXd& points) const {
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = evaluate(points.row(i).transpose());
    return out;
}

int MlasSurrogate::finest_level() const {
    int l = -1;
    for (const auto& lv : levels) l = std::max(l, lv.level);
    return l;
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void to_json(nlohmann::json& j, const MlasSurrogate& s) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lv : s.levels) {
        const auto& d = lv.diagnostics;
        levels.push_back({{"level", lv.level},
                          {"subspace", lv.subspace},
                          {"index_set", lv.index_set},
                          {"coeffs", to_vec(lv.coeffs)},
                          {"diagnostics",
                           {{"gradient_samples", d.gradient_samples},
                            {"fit_samples", d.fit_samples},
                            {"gram_deviation", d.gram_deviation},
                            {"residual", d.residual},
                            {"svd_tail", d.svd_tail},
                            {"redraws", d.redraws}}}});
    }
    j = {{"format", "mlas-surrogate"},
         {"version", kSurrogateFormatVersion},
         {"dim", s.dim},
         {"levels", levels},
         {"work", s.work}};
}

void from_json(const nlohmann::json& j, MlasSurrogate& s) {
    if (j.value("format", std::string{}) != "mlas-surrogate") {
        throw std::invalid_argument("surrogate: not an mlas-surrogate document");
    }
    const int version = j.at("version").get<int>();
    if (version != kSurrogateFormatVersion) {
        throw std::invalid_argument("surrogate: unsupported format version " + std::to_string(version));
    }
    MlasSurrogate out;
    out.dim = j.at("dim").get<std::size_t>();
    for (const auto& e : j.at("levels")) {
        LevelSurrogate lv;
        lv.level = e.at("level").get<int>();
        lv.subspace = e.at("subspace").get<Subspace>();
        lv.index_set = e.at("index_set").get<MultiIndexSet>();
        const auto c = e.at("coeffs").get<std::vector<double>>();
        lv.coeffs = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        if (lv.subspace.ambient_dim() != out.dim) throw std::invalid_argument("surrogate: subspace dimension mismatch");
        if (lv.index_set.dim() != lv.subspace.rank()) throw std::invalid_argument("surrogate: index set dimension mismatch");
        if (lv.coeffs.size() != static_cast<Eigen::Index>(lv.index_set.size())) {
            throw std::invalid_argument("surrogate: coefficient count mismatch");
        }
        if (e.contains("diagnostics")) {
            const auto& d = e.at("diagnostics");
            lv.diagnostics.gradient_samples = d.value("gradient_samples", std::size_t{0});
            lv.diagnostics.fit_samples = d.value("fit_samples", std::size_t{0});
            lv.diagnostics.gram_deviation = d.value("gram_deviation", 0.0);
            lv.diagnostics.residual = d.value("residual", 0.0);
            lv.diagnostics.svd_tail = d.value("svd_tail", 0.0);
            lv.diagnostics.redraws = d.value("redraws", 0);
        }
        out.levels.push_back(std::move(lv));
    }
    if (j.contains("work")) out.work = j.at("work").get<WorkLedger>();
    s = std::move(out);
}

unsigned IndexSetRule::degree_for(std::size_t rank) const {
    unsigned p = 0;
    while (p < max_degree && total_degree_size(rank, p + 1) <= max_size) ++p;
    return p;
}

void MultilevelPlan::validate() const {
    if (L < 0) throw std::invalid_argument("plan: L must be >= 0");
    const auto n = static_cast<std::size_t>(L) + 1;
    if (ranks.size() != n || gradient_samples.size() != n || degrees.size() != n || poly_dims.size() != n) {
        throw std::invalid_argument("plan: every sequence needs L+1 entries");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (ranks[k] == 0) throw std::invalid_argument("plan: ranks must be positive");
        if (poly_dims[k] != total_degree_size(ranks[k], degrees[k])) {
            throw std::invalid_argument("plan: poly_dims do not match the total-degree sets");
        }
        if (k == 0) continue;
        if (ranks[k] <= ranks[k - 1]) throw std::invalid_argument("plan: ranks must be strictly increasing");
        if (gradient_samples[k] <= gradient_samples[k - 1]) {
            throw std::invalid_argument("plan: gradient sample counts must be strictly increasing");
        }
        if (poly_dims[k] <= poly_dims[k - 1]) throw std::invalid_argument("plan: poly dims must be strictly increasing");
    }
}

MultilevelPlan geometric_plan(int L, std::size_t r_base, double rank_ratio, double c_m, const IndexSetRule& rule) {
    if (L < 0) throw std::invalid_argument("geometric_plan: L must be >= 0");
    if (r_base < 1) throw std::invalid_argument("geometric_plan: r_base must be >= 1");
    if (!(rank_ratio > 1.0)) throw std::invalid_argument("geometric_plan: rank_ratio must exceed 1");
    if (!(c_m > 1.0)) throw std::invalid_argument("geometric_plan: C_M must exceed 1");
    MultilevelPlan plan;
    plan.L = L;
    for (int k = 0; k <= L; ++k) {
        auto r = static_cast<std::size_t>(std::ceil(static_cast<double>(r_base) * std::pow(rank_ratio, k) - 1e-9));
        if (k > 0) r = std::max(r, plan.ranks.back() + 1);
        const double rd = static_cast<double>(r);
        auto m = static_cast<std::size_t>(std::ceil(c_m * rd * std::log(rd + 1.0) - 1e-9));
        m = std::max(m, r + 1);
        if (k > 0) m = std::max(m, plan.gradient_samples.back() + 1);
        const unsigned p = rule.degree_for(r);
        plan.ranks.push_back(r);
        plan.gradient_samples.push_back(m);
        plan.degrees.push_back(p);
        plan.poly_dims.push_back(total_degree_size(r, p));
    }
    plan.validate();
    return plan;
}

LevelSurrogate fit_level(const ModelHierarchy& hier, int level, Target target, std::size_t rank,
                         std::size_t gradient_samples, const MultiIndexSet& index_set, double t,
                         const SeededStream& stream, WorkLedger& ledger, const ConditioningPolicy& policy) {
    const std::size_t d = hier.dim();
    if (rank < 1 || rank > d) throw std::invalid_argument("fit_level: rank must lie in [1, d]");
    if (index_set.dim() != rank) throw std::invalid_argument("fit_level: index set dimension differs from rank");

    const SpectralDecomposition dec = slas_decomposition(hier, level, rank, gradient_samples, stream.child(0), &ledger, target);
    LevelSurrogate out;
    out.level = level;
    out.subspace = Subspace::from_decomposition(dec);
    out.index_set = index_set;
    out.diagnostics.gradient_samples = gradient_samples;
    out.diagnostics.svd_tail = dec.tail(rank);
    const Eigen::MatrixXd w = orthonormal_completion(out.subspace.basis);

    std::size_t n = required_samples(index_set.size(), t);
    double deviation = 0.0;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        const SeededStream s = stream.child(1).child(static_cast<std::uint64_t>(attempt));
        WeightedSamples active = draw_optimal(index_set, s.child(0), n);
        // The Gram matrix depends only on the active points, so it is checked
        // before any model evaluation is spent on them.
        deviation = gram_deviation(gram_matrix(index_set, active));
        if (deviation > policy.max_deviation) {
            n *= 2;
            continue;
        }
        Eigen::MatrixXd points = active.points * out.subspace.basis.transpose();
        if (w.cols() > 0) points += draw_gaussian(static_cast<std::size_t>(w.cols()), s.child(1), n) * w.transpose();
        const Eigen::VectorXd values = value_batch(hier, level, target, points);
        ledger.charge_functions(level, n, target_work(hier, level, target));
        const LsFit f = fit(index_set, active, values);
        out.coeffs = f.coeffs();
        out.diagnostics.fit_samples = n;
        out.diagnostics.gram_deviation = f.gram_deviation;
        out.diagnostics.residual = f.residual();
        out.diagnostics.redraws = attempt;
        return out;
    }
    throw LevelFitError(level, deviation);
}

MlasSurrogate mlaspa_fit(const ModelHierarchy& hier, const MultilevelPlan& plan, double t, const SeededStream& stream,
                         const ConditioningPolicy& policy) {
    plan.validate();
    if (plan.L > hier.max_level()) throw std::invalid_argument("mlaspa_fit: plan needs more levels than the hierarchy has");
    MlasSurrogate surr;
    surr.dim = hier.dim();
    for (int l = 0; l <= plan.L; ++l) {
        const auto k = static_cast<std::size_t>(plan.L - l);
        const MultiIndexSet set = MultiIndexSet::total_degree(plan.ranks[k], plan.degrees[k]);
        surr.levels.push_back(fit_level(hier, l, Target::Difference, plan.ranks[k], plan.gradient_samples[k], set, t,
                                        stream.child(static_cast<std::uint64_t>(l)), surr.work, policy));
    }
    return surr;
}

MlasSurrogate slaspa_fit(const ModelHierarchy& hier, int level, std::size_t rank, std::size_t gradient_samples,
                         unsigned degree, double t, const SeededStream& stream, const ConditioningPolicy& policy) {
    if (level < 0 || level > hier.max_level()) throw std::invalid_argument("slaspa_fit: level out of range");
    MlasSurrogate surr;
    surr.dim = hier.dim();
    surr.levels.push_back(fit_level(hier, level, Target::Function, rank, gradient_samples,
                                    MultiIndexSet::total_degree(rank, degree), t,
                                    stream.child(static_cast<std::uint64_t>(level)), surr.work, policy));
    return surr;
}

TestSet make_test_set(const ModelHierarchy& hier, int ref_level, std::size_t n, const SeededStream& stream) {
    if (n == 0) throw std::invalid_argument("make_test_set: need at least one point");
    TestSet ts;
    ts.ref_level = ref_level;
    ts.points = draw_gaussian(hier.dim(), stream, n);
    ts.values = value_batch(hier, ref_level, Target::Function, ts.points);
    return ts;
}

namespace {

McEstimate mean_and_se(const Eigen::VectorXd& v) {
    const auto n = static_cast<double>(v.size());
    const double mean = v.mean();
    if (v.size() < 2) return {mean, 0.0};
    const double var = (v.array() - mean).square().sum() / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

// sqrt of a nonnegative mean estimate with the delta-method standard error.
McEstimate sqrt_estimate(const McEstimate& sq) {
    const double v = std::max(sq.value, 0.0);
    const double r = std::sqrt(v);
    return {r, r > 0.0 ? sq.std_error / (2.0 * r) : std::sqrt(sq.std_error)};
}

}  // namespace

McEstimate mc_l2_error(const MlasSurrogate& surr, const TestSet& test) {
    if (test.ref_level < surr.finest_level()) {
        throw std::invalid_argument("mc_l2_error: reference level below the surrogate's finest level");
    }
    const Eigen::VectorXd e = test.values - surr.evaluate_batch(test.points);
    return sqrt_estimate(mean_and_se(e.array().square().matrix()));
}

McEstimate mc_l2_error(const MlasSurrogate& surr, const ModelHierarchy& hier, int ref_level, std::size_t n_test,
                       const SeededStream& stream) {
    if (ref_level < surr.finest_level()) {
        throw std::invalid_argument("mc_l2_error: reference level below the surrogate's finest level");
    }
    return mc_l2_error(surr, make_test_set(hier, ref_level, n_test, stream));
}

McEstimate conditional_expectation_oracle(const ScalarFn& f, const Eigen::MatrixXd& v, const Eigen::MatrixXd& w,
                                          const Eigen::VectorXd& x, std::size_t k, Engine& engine) {
    if (k == 0) throw std::invalid_argument("conditional_expectation_oracle: K must be positive");
    if (x.size() != v.cols()) throw std::invalid_argument("conditional_expectation_oracle: active point dimension mismatch");
    const Eigen::VectorXd base = v * x;
    Eigen::VectorXd vals(static_cast<Eigen::Index>(k));
    if (w.cols() == 0) {
        vals.setConstant(f(base));
    } else {
        const Eigen::MatrixXd z = draw_gaussian(static_cast<std::size_t>(w.cols()), engine, k);
        for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = f(base + w * z.row(i).transpose());
    }
    return mean_and_se(vals);
}

McEstimate conditional_expectation_oracle(const ScalarFn& f, const Subspace& v, const Eigen::VectorXd& x,
                                          std::size_t k, const SeededStream& stream) {
    Engine engine = stream.engine();
    return conditional_expectation_oracle(f, v.basis, orthonormal_completion(v.basis), x, k, engine);
}

double PoincareCheck::error() const { return sqrt_estimate(error_sq).value; }
double PoincareCheck::bound() const { return sqrt_estimate(bound_sq).value; }
double PoincareCheck::error_sigma() const { return sqrt_estimate(error_sq).std_error; }
double PoincareCheck::bound_sigma() const { return sqrt_estimate(bound_sq).std_error; }

PoincareCheck poincare_check(const ScalarFn& f, const VectorFn& grad, const Subspace& v, std::size_t outer,
                             std::size_t inner, const SeededStream& stream) {
    if (outer < 2 || inner < 2) throw std::invalid_argument("poincare_check: need at least two outer and inner draws");
    const Eigen::MatrixXd& basis = v.basis;
    const Eigen::MatrixXd w = orthonormal_completion(basis);
    const auto d = basis.rows();
    Engine outer_engine = stream.child(0).engine();
    Engine inner_engine = stream.child(1).engine();
    const Eigen::MatrixXd ys = draw_gaussian(static_cast<std::size_t>(d), outer_engine, outer);

    Eigen::VectorXd err(static_cast<Eigen::Index>(outer));
    Eigen::VectorXd bnd(static_cast<Eigen::Index>(outer));
    for (Eigen::Index i = 0; i < ys.rows(); ++i) {
        const Eigen::VectorXd y = ys.row(i).transpose();
        const Eigen::VectorXd x = basis.transpose() * y;
        const McEstimate g = conditional_expectation_oracle(f, basis, w, x, inner, inner_engine);
        // E[(f − ĝ)²] = (f − g*)² + Var(ĝ); the inner variance is removed.
        err[i] = std::pow(f(y) - g.value, 2) - g.std_error * g.std_error;
        const Eigen::VectorXd gy = grad(y);
        bnd[i] = (gy - basis * (basis.transpose() * gy)).squaredNorm();
    }
    return {mean_and_se(err), mean_and_se(bnd)};
}

}  // namespace mlas
