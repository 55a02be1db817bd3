#include "mlas/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mlas {

std::size_t rank_schedule(std::size_t k) {
    if (k >= 63) throw std::overflow_error("rank_schedule: k too large");
    return std::size_t{1} << k;
}

bool is_downward_closed(const CellSet& cells) {
    for (const auto& c : cells) {
        if (c.k > 0 && !cells.contains({c.k - 1, c.l})) return false;
        if (c.l > 0 && !cells.contains({c.k, c.l - 1})) return false;
    }
    return true;
}

std::vector<CellIndex> admissible_neighbors(const CellSet& cells, CellIndex cell) {
    if (!cells.contains(cell)) throw std::invalid_argument("admissible_neighbors: cell is not in the index set");
    std::size_t l_max = 0;
    for (const auto& c : cells) {
        if (c.k == 0) l_max = std::max(l_max, c.l);
    }
    // A candidate is kept only if its lower neighbors are already present, so
    // that adding it leaves the set downward-closed.
    const auto keep = [&cells](CellIndex c) {
        return !cells.contains(c) && (c.l == 0 || cells.contains({c.k, c.l - 1}));
    };
    std::vector<CellIndex> out;
    const CellIndex up{cell.k + 1, cell.l};
    if (keep(up)) out.push_back(up);
    if (cell.k == 0 && cell.l == l_max) {
        const CellIndex next{0, l_max + 1};
        if (keep(next)) out.push_back(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polyapprox

namespace {

void append_rows(Eigen::MatrixXd& dst, const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) return;
    if (dst.size() == 0) {
        dst = rows;
        return;
    }
    const auto old = dst.rows();
    dst.conservativeResize(old + rows.rows(), Eigen::NoChange);
    dst.bottomRows(rows.rows()) = rows;
}

void append(Eigen::VectorXd& dst, const Eigen::VectorXd& v) {
    const auto old = dst.size();
    dst.conservativeResize(old + v.size());
    dst.tail(v.size()) = v;
}

struct Draw {
    WeightedSamples active;
    std::vector<Eigen::Index> reused;  // pool index per slot, −1 for fresh
    Eigen::MatrixXd fresh_points;       // ambient points of fresh slots, in slot order
    std::vector<MultiIndex> fresh_tags;
    double deviation = 0.0;
};

Draw draw_slots(const MultiIndexSet& set, const SamplePool& pool, const Eigen::MatrixXd& v, const Eigen::MatrixXd& w,
                std::size_t n, Engine& engine) {
    std::map<MultiIndex, std::vector<Eigen::Index>> by_tag;
    for (std::size_t i = 0; i < pool.size(); ++i) by_tag[pool.tags[i]].push_back(static_cast<Eigen::Index>(i));
    std::map<MultiIndex, std::size_t> cursor;

    const auto r = static_cast<std::size_t>(v.cols());
    const auto nn = static_cast<Eigen::Index>(n);
    Draw d;
    d.active.points.resize(nn, v.cols());
    d.active.weights.resize(nn);
    d.reused.assign(n, -1);
    std::vector<Eigen::VectorXd> fresh;
    std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < nn; ++i) {
        const MultiIndex& nu = set[pick(engine)];
        const auto it = by_tag.find(nu);
        auto& cur = cursor[nu];
        if (it != by_tag.end() && cur < it->second.size()) {
            const Eigen::Index p = it->second[cur++];
            d.reused[static_cast<std::size_t>(i)] = p;
            d.active.points.row(i) = (v.transpose() * pool.points.row(p).transpose()).transpose();
        } else {
            const Eigen::VectorXd x = draw_component(nu, r, engine);
            Eigen::VectorXd y = v * x;
            if (w.cols() > 0) {
                Eigen::VectorXd z(w.cols());
                for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(engine);
                y += w * z;
            }
            d.active.points.row(i) = x.transpose();
            fresh.push_back(std::move(y));
            d.fresh_tags.push_back(nu);
        }
        const Eigen::VectorXd xi = d.active.points.row(i).transpose();
        d.active.weights[i] = optimal_weight(set, std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
    }
    d.fresh_points.resize(static_cast<Eigen::Index>(fresh.size()), v.rows());
    for (std::size_t i = 0; i < fresh.size(); ++i) d.fresh_points.row(static_cast<Eigen::Index>(i)) = fresh[i].transpose();
    d.deviation = gram_deviation(gram_matrix(set, d.active));
    return d;
}

}  // namespace

PolyapproxResult polyapprox(const BatchFn& f, const Subspace& v, double tol, const WarmStart* warm, double t,
                            const SeededStream& stream, const PolyapproxOptions& opts) {
    if (!(tol > 0.0)) throw std::invalid_argument("polyapprox: tol must be positive");
    const std::size_t r = v.rank();
    if (r == 0) throw std::invalid_argument("polyapprox: empty subspace");
    const Eigen::MatrixXd w = orthonormal_completion(v.basis);

    PolyapproxResult res;
    MultiIndexSet s = MultiIndexSet::zero(r);
    res.coeffs = Eigen::VectorXd::Zero(1);
    if (warm) {
        if (warm->set.dim() > r) throw std::invalid_argument("polyapprox: warm start has more variables than V");
        if (!warm->set.empty()) {
            s = warm->set.with_dim(r);
            res.coeffs = warm->coeffs.size() == static_cast<Eigen::Index>(s.size()) ? warm->coeffs
                                                                                     : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
        }
        res.pool = warm->pool;
        if (res.pool.size() > 0 && res.pool.points.cols() != v.basis.rows()) {
            throw std::invalid_argument("polyapprox: warm pool dimension mismatch");
        }
    }
    res.set = s;

    for (int round = 0; round < opts.max_rounds; ++round) {
        const std::vector<MultiIndex> margin = reduced_margin(s);
        const MultiIndexSet tset = s.with_added(margin);
        if (tset.size() > opts.max_set_size) break;

        std::size_t n = required_samples(tset.size(), t);
        Draw draw;
        bool conditioned = false;
        for (int attempt = 0; attempt <= opts.policy.max_retries; ++attempt) {
            Engine engine = stream.child(static_cast<std::uint64_t>(round)).child(static_cast<std::uint64_t>(attempt)).engine();
            draw = draw_slots(tset, res.pool, v.basis, w, n, engine);
            if (draw.deviation <= opts.policy.max_deviation) {
                conditioned = true;
                break;
            }
            n *= 2;
        }
        if (!conditioned) throw ConditioningError("polyapprox: Gram matrix stayed ill-conditioned", draw.deviation);

        const auto fresh = static_cast<std::size_t>(draw.fresh_points.rows());
        if (res.work + static_cast<double>(fresh) * opts.unit_cost > opts.work_cap) {
            res.partial = true;
            break;
        }
        const Eigen::VectorXd fresh_values = fresh > 0 ? f(draw.fresh_points) : Eigen::VectorXd();
        if (static_cast<std::size_t>(fresh_values.size()) != fresh) {
            throw std::runtime_error("polyapprox: value function returned the wrong number of values");
        }
        res.evaluations += fresh;
        res.work += static_cast<double>(fresh) * opts.unit_cost;

        Eigen::VectorXd values(static_cast<Eigen::Index>(n));
        Eigen::Index next_fresh = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = draw.reused[i];
            values[static_cast<Eigen::Index>(i)] = p >= 0 ? res.pool.values[p] : fresh_values[next_fresh++];
        }
        append_rows(res.pool.points, draw.fresh_points);
        append(res.pool.values, fresh_values);
        res.pool.tags.insert(res.pool.tags.end(), draw.fresh_tags.begin(), draw.fresh_tags.end());

        const LsFit fitted = fit(tset, draw.active, values);
        const Eigen::VectorXd c = fitted.coeffs();
        const auto ns = static_cast<Eigen::Index>(s.size());
        const Eigen::VectorXd c_margin = c.tail(c.size() - ns);
        res.set = s;
        res.coeffs = c.head(ns);
        res.error_estimate = c_margin.norm() + fitted.residual();
        res.residual = fitted.residual();
        res.gram_deviation = fitted.gram_deviation;
        res.fit_samples = n;
        res.rounds = round + 1;
        if (res.error_estimate <= tol) {
            res.converged = true;
            break;
        }
        // The residual also carries the variation along the inactive
        // directions, which no polynomial in x can remove. Once the margin is
        // below tol, enlarging S only chases that floor.
        if (c_margin.norm() <= tol) {
            res.stalled = true;
            break;
        }

        const double cmax = c_margin.cwiseAbs().maxCoeff();
        std::vector<MultiIndex> bulk;
        for (std::size_t j = 0; j < margin.size(); ++j) {
            if (std::abs(c_margin[static_cast<Eigen::Index>(j)]) >= opts.bulk_fraction * cmax) bulk.push_back(margin[j]);
        }
        s = s.with_added(bulk);
    }
    return res;
}

// ---------------------------------------------------------------------------
// AMLASPA

CellSet AdaptiveState::index_set() const {
    CellSet out;
    for (const auto& [c, rec] : cells) out.insert(c);
    return out;
}

std::size_t AdaptiveState::rank(std::size_t k) const { return std::min(options.schedule(k), dim); }

double AdaptiveState::error_estimate() const {
    double e = 0.0;
    int finest = -1;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto& lv = levels[l];
        if (lv.rank == 0) continue;
        e += std::sqrt(std::max(lv.tail, 0.0)) + lv.poly_error;
        finest = static_cast<int>(l);
    }
    if (finest >= 0) e += std::sqrt(std::max(levels[static_cast<std::size_t>(finest)].trace(), 0.0));
    return e;
}

AdaptiveState make_adaptive_state(const ModelHierarchy& hier, const AmlaspaOptions& options) {
    if (!(options.c_m > 0.0)) throw std::invalid_argument("amlaspa: C_M must be positive");
    if (!(options.t > 0.0)) throw std::invalid_argument("amlaspa: t must be positive");
    if (!options.schedule) throw std::invalid_argument("amlaspa: missing rank schedule");
    AdaptiveState st;
    st.dim = hier.dim();
    st.options = options;
    if (st.options.max_level < 0 || st.options.max_level > hier.max_level()) st.options.max_level = hier.max_level();
    for (std::size_t k = 1; k < 8; ++k) {
        if (options.schedule(k) <= options.schedule(k - 1)) {
            throw std::invalid_argument("amlaspa: rank schedule must be strictly increasing");
        }
    }
    return st;
}

namespace {

double block_gain(const Eigen::VectorXd& spectrum, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t j = lo; j < hi && j < static_cast<std::size_t>(spectrum.size()); ++j) s += spectrum[static_cast<Eigen::Index>(j)];
    return std::sqrt(std::max(s, 0.0));
}

}  // namespace

void explore_cell(AdaptiveState& st, CellIndex cell, const ModelHierarchy& hier, const SeededStream& stream) {
    if (st.cells.contains(cell)) throw std::invalid_argument("explore_cell: cell already explored");
    if (cell.k > 0 && !st.cells.contains({cell.k - 1, cell.l})) throw std::invalid_argument("explore_cell: cell not admissible");
    if (cell.k == 0 && cell.l > 0 && !st.cells.contains({0, cell.l - 1})) {
        throw std::invalid_argument("explore_cell: cell not admissible");
    }
    if (static_cast<int>(cell.l) > st.options.max_level) throw std::invalid_argument("explore_cell: level out of range");
    const std::size_t r = st.rank(cell.k);
    if (cell.k > 0 && st.rank(cell.k - 1) >= st.dim) throw std::invalid_argument("explore_cell: rank already covers the dimension");

    const int level = static_cast<int>(cell.l);
    const SeededStream ls = stream.child(cell.l);
    if (st.levels.size() <= cell.l) st.levels.resize(cell.l + 1);
    AdaptiveLevel& lv = st.levels[cell.l];
    const double cost = delta_work(hier, level);

    // Gradient pool top-up to M = ceil(C r log(r+1)).
    const double rd = static_cast<double>(r);
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(st.options.c_m * rd * std::log(rd + 1.0) - 1e-9)));
    const auto have = static_cast<std::size_t>(lv.grads.rows());
    std::size_t fresh = 0;
    if (m > have) {
        fresh = m - have;
        const Eigen::MatrixXd pts = draw_gaussian(st.dim, ls.child(0).child(lv.top_ups++), fresh);
        append_rows(lv.grad_points, pts);
        append_rows(lv.grads, gradient_batch(hier, level, Target::Difference, pts));
        st.ledger.charge_gradients(level, fresh, cost);
    }
    const double grad_work = static_cast<double>(fresh) * cost;

    Eigen::VectorXd sv(static_cast<Eigen::Index>(r));
    if (st.options.identity_subspace) {
        lv.spectrum = lv.grads.array().square().colwise().sum().transpose() / static_cast<double>(lv.grads.rows());
        lv.directions = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(st.dim), static_cast<Eigen::Index>(r));
        sv = lv.spectrum.head(static_cast<Eigen::Index>(r)).cwiseMax(0.0).cwiseSqrt();
    } else {
        const SpectralDecomposition dec = gradient_decomposition(lv.grads, r);
        lv.spectrum = dec.spectrum;
        lv.directions = dec.eigvecs;
        sv = dec.eigvals.cwiseMax(0.0).cwiseSqrt();
    }
    lv.k_max = cell.k;
    lv.rank = r;
    lv.tail = 0.0;
    for (Eigen::Index j = static_cast<Eigen::Index>(r); j < lv.spectrum.size(); ++j) lv.tail += lv.spectrum[j];
    lv.tail = std::max(lv.tail, 0.0);

    // Gains of every explored block at this level follow the new spectrum.
    for (std::size_t k = 0; k <= cell.k; ++k) {
        const std::size_t lo = k == 0 ? 0 : st.rank(k - 1);
        const double g = block_gain(lv.spectrum, lo, st.rank(k));
        if (k == cell.k) continue;
        st.cells.at({k, cell.l}).gain = g;
    }
    const double gain = block_gain(lv.spectrum, cell.k == 0 ? 0 : st.rank(cell.k - 1), r);

    const Subspace v = Subspace::from_basis(lv.directions.leftCols(static_cast<Eigen::Index>(r)), sv);
    const double tol = std::max(std::sqrt(lv.tail), st.options.tolerance_floor);
    std::optional<WarmStart> warm;
    if (lv.has_poly) {
        warm = WarmStart{lv.set, lv.coeffs, {}};
        const double rot = projector_distance(lv.subspace.basis, v.basis.leftCols(lv.subspace.basis.cols()));
        if (rot <= st.options.rotation_threshold) warm->pool = lv.pool;
    }
    PolyapproxOptions popts = st.options.poly;
    popts.unit_cost = cost;
    const BatchFn fn = [&hier, level](const Eigen::MatrixXd& ys) { return value_batch(hier, level, Target::Difference, ys); };
    PolyapproxResult pr = polyapprox(fn, v, tol, warm ? &*warm : nullptr, st.options.t, ls.child(1).child(cell.k), popts);
    if (pr.evaluations > 0) st.ledger.charge_functions(level, pr.evaluations, cost);

    lv.has_poly = true;
    lv.subspace = v;
    lv.set = std::move(pr.set);
    lv.coeffs = std::move(pr.coeffs);
    lv.pool = std::move(pr.pool);
    lv.poly_error = pr.error_estimate;
    lv.poly_residual = pr.residual;
    lv.poly_gram_deviation = pr.gram_deviation;
    lv.poly_partial = pr.partial;
    st.partial = st.partial || pr.partial;

    const double work = grad_work + pr.work;
    st.work += work;
    st.cells[cell] = CellRecord{cell, r, gain, work, st.cells.size()};
}

MlasSurrogate assemble_surrogate(const AdaptiveState& st) {
    MlasSurrogate s;
    s.dim = st.dim;
    s.work = st.ledger;
    for (std::size_t l = 0; l < st.levels.size(); ++l) {
        const auto& lv = st.levels[l];
        if (!lv.has_poly) continue;
        LevelSurrogate ls;
        ls.level = static_cast<int>(l);
        ls.subspace = lv.subspace;
        ls.index_set = lv.set;
        ls.coeffs = lv.coeffs;
        ls.diagnostics.gradient_samples = static_cast<std::size_t>(lv.grads.rows());
        ls.diagnostics.fit_samples = lv.pool.size();
        ls.diagnostics.gram_deviation = lv.poly_gram_deviation;
        ls.diagnostics.residual = lv.poly_residual;
        ls.diagnostics.svd_tail = lv.tail;
        s.levels.push_back(std::move(ls));
    }
    return s;
}

namespace {

nlohmann::json cell_json(const CellRecord& c) {
    return {{"k", c.cell.k}, {"l", c.cell.l}, {"rank", c.rank}, {"gain", c.gain}, {"work", c.work}};
}

nlohmann::json level_json(const AdaptiveState& st) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t l = 0; l < st.levels.size(); ++l) {
        const auto& lv = st.levels[l];
        if (lv.rank == 0) continue;
        out.push_back({{"level", l},
                       {"rank", lv.rank},
                       {"tail", lv.tail},
                       {"poly_error", lv.poly_error},
                       {"set_size", lv.set.size()}});
    }
    return out;
}

double profit(const CellRecord& c) {
    if (c.work > 0.0) return c.gain / c.work;
    return c.gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

AmlaspaResult amlaspa(const ModelHierarchy& hier, const AmlaspaOptions& options, const SeededStream& stream) {
    if (!(options.work_budget > 0.0)) throw std::invalid_argument("amlaspa: work budget must be positive");
    AmlaspaResult res;
    AdaptiveState st = make_adaptive_state(hier, options);

    explore_cell(st, {0, 0}, hier, stream);
    res.exploration_order.push_back({0, 0});
    res.trace.push_back({{"iteration", 0},
                         {"selected", nullptr},
                         {"explored", {cell_json(st.cells.at({0, 0}))}},
                         {"profit", nullptr},
                         {"work", st.work},
                         {"error_estimate", st.error_estimate()},
                         {"levels", level_json(st)}});

    bool exhausted = false;
    for (std::size_t it = 1; it <= st.options.max_iterations; ++it) {
        if (st.work >= options.work_budget) {
            exhausted = true;
            break;
        }
        const CellSet cells = st.index_set();
        std::optional<CellIndex> best;
        std::vector<CellIndex> best_nb;
        double best_profit = -1.0;
        for (const auto& [c, rec] : st.cells) {
            std::vector<CellIndex> nb;
            for (const auto& n : admissible_neighbors(cells, c)) {
                if (static_cast<int>(n.l) > st.options.max_level) continue;
                if (n.k > 0 && st.rank(n.k - 1) >= st.dim) continue;
                nb.push_back(n);
            }
            if (nb.empty()) continue;
            const double p = profit(rec);
            const bool better = !best || p > best_profit ||
                                (p == best_profit && std::pair(c.l, c.k) < std::pair(best->l, best->k));
            if (better) {
                best = c;
                best_nb = std::move(nb);
                best_profit = p;
            }
        }
        if (!best) break;
        nlohmann::json explored = nlohmann::json::array();
        for (const auto& n : best_nb) {
            explore_cell(st, n, hier, stream);
            res.exploration_order.push_back(n);
            explored.push_back(cell_json(st.cells.at(n)));
        }
        res.trace.push_back({{"iteration", it},
                             {"selected", {{"k", best->k}, {"l", best->l}}},
                             {"explored", explored},
                             {"profit", best_profit},
                             {"work", st.work},
                             {"error_estimate", st.error_estimate()},
                             {"levels", level_json(st)}});
    }

    // The budget did not even cover one expansion: flag the result as partial.
    if (exhausted && res.exploration_order.size() == 1) st.partial = true;

    res.surrogate = assemble_surrogate(st);
    res.error_estimate = st.error_estimate();
    res.work = st.work;
    res.partial = st.partial;
    res.state = std::move(st);
    return res;
}

void write_trace(std::ostream& os, const std::vector<nlohmann::json>& trace) {
    for (const auto& rec : trace) os << rec.dump() << '\n';
}

}  // namespace mlas
