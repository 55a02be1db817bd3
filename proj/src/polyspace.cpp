#include "mlas/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace mlas {

void hermite_eval_into(double x, std::span<double> out) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument("hermite_eval: non-finite argument");
    }
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = x;
    // H_{n+1} = (x H_n - sqrt(n) H_{n-1}) / sqrt(n+1)
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        const double dn = static_cast<double>(n);
        out[n + 1] = (x * out[n] - std::sqrt(dn) * out[n - 1]) / std::sqrt(dn + 1.0);
    }
}

std::vector<double> hermite_eval_all(unsigned nmax, double x) {
    std::vector<double> h(static_cast<std::size_t>(nmax) + 1);
    hermite_eval_into(x, h);
    return h;
}

// ---------------------------------------------------------------------------
// MultiIndex

MultiIndex MultiIndex::from_dense(std::span<const unsigned> degrees) {
    MultiIndex nu;
    for (std::size_t j = 0; j < degrees.size(); ++j) {
        if (degrees[j] != 0) nu.entries_.emplace_back(static_cast<std::uint32_t>(j), degrees[j]);
    }
    return nu;
}

MultiIndex MultiIndex::from_entries(std::vector<Entry> entries) {
    std::erase_if(entries, [](const Entry& e) { return e.second == 0; });
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].first == entries[i - 1].first) {
            throw std::invalid_argument("MultiIndex: duplicate position " +
                                        std::to_string(entries[i].first));
        }
    }
    MultiIndex nu;
    nu.entries_ = std::move(entries);
    return nu;
}

MultiIndex MultiIndex::unit(std::uint32_t position, std::uint32_t degree) {
    MultiIndex nu;
    if (degree > 0) nu.entries_.emplace_back(position, degree);
    return nu;
}

std::uint32_t MultiIndex::operator[](std::uint32_t position) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{position, 0});
    return (it != entries_.end() && it->first == position) ? it->second : 0;
}

std::uint32_t MultiIndex::total_degree() const {
    std::uint32_t s = 0;
    for (const auto& [pos, deg] : entries_) s += deg;
    return s;
}

std::uint32_t MultiIndex::support_dim() const {
    return entries_.empty() ? 0 : entries_.back().first + 1;
}

std::vector<unsigned> MultiIndex::to_dense(std::size_t dim) const {
    if (support_dim() > dim) throw std::invalid_argument("MultiIndex::to_dense: support exceeds dim");
    std::vector<unsigned> dense(dim, 0);
    for (const auto& [pos, deg] : entries_) dense[pos] = deg;
    return dense;
}

MultiIndex MultiIndex::incremented(std::uint32_t position) const {
    MultiIndex nu = *this;
    auto it = std::lower_bound(nu.entries_.begin(), nu.entries_.end(), Entry{position, 0});
    if (it != nu.entries_.end() && it->first == position) {
        ++it->second;
    } else {
        nu.entries_.insert(it, Entry{position, 1});
    }
    return nu;
}

std::optional<MultiIndex> MultiIndex::decremented(std::uint32_t position) const {
    auto pos_it = std::lower_bound(entries_.begin(), entries_.end(), Entry{position, 0});
    if (pos_it == entries_.end() || pos_it->first != position) return std::nullopt;
    MultiIndex nu = *this;
    auto it = nu.entries_.begin() + (pos_it - entries_.begin());
    if (--it->second == 0) nu.entries_.erase(it);
    return nu;
}

double tensor_eval(const MultiIndex& nu, std::span<const double> x) {
    if (nu.support_dim() > x.size()) {
        throw std::invalid_argument("tensor_eval: multi-index support exceeds point dimension");
    }
    double prod = 1.0;
    std::vector<double> h;
    for (const auto& [pos, deg] : nu.entries()) {
        h.resize(deg + 1);
        hermite_eval_into(x[pos], h);
        prod *= h[deg];
    }
    return prod;
}

bool is_downward_closed(std::span<const MultiIndex> indices) {
    std::set<MultiIndex> members(indices.begin(), indices.end());
    for (const auto& nu : indices) {
        for (const auto& [pos, deg] : nu.entries()) {
            if (!members.contains(*nu.decremented(pos))) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// MultiIndexSet

MultiIndexSet::MultiIndexSet(std::size_t dim, std::vector<MultiIndex> indices)
    : dim_(dim), indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i].support_dim() > dim_) {
            throw std::invalid_argument("MultiIndexSet: index supported beyond dim " +
                                        std::to_string(dim_));
        }
        if (!lookup_.emplace(indices_[i], i).second) {
            throw std::invalid_argument("MultiIndexSet: duplicate index");
        }
    }
    for (const auto& nu : indices_) {
        for (const auto& [pos, deg] : nu.entries()) {
            if (!lookup_.contains(*nu.decremented(pos))) {
                throw std::invalid_argument("MultiIndexSet: set is not downward-closed");
            }
        }
    }
    max_degree_.assign(dim_, 0);
    for (const auto& nu : indices_) {
        for (const auto& [pos, deg] : nu.entries()) max_degree_[pos] = std::max<unsigned>(max_degree_[pos], deg);
    }
}

MultiIndexSet MultiIndexSet::zero(std::size_t dim) { return MultiIndexSet(dim, {MultiIndex{}}); }

MultiIndexSet MultiIndexSet::total_degree(std::size_t dim, unsigned degree) {
    // Enumerate by increasing total degree so lower-order terms come first.
    std::vector<MultiIndex> out{MultiIndex{}};
    std::vector<MultiIndex> shell{MultiIndex{}};
    for (unsigned p = 1; p <= degree && dim > 0; ++p) {
        std::set<MultiIndex> next;
        for (const auto& nu : shell) {
            for (std::size_t j = 0; j < dim; ++j) next.insert(nu.incremented(static_cast<std::uint32_t>(j)));
        }
        shell.assign(next.begin(), next.end());
        out.insert(out.end(), shell.begin(), shell.end());
    }
    return MultiIndexSet(dim, std::move(out));
}

std::optional<std::size_t> MultiIndexSet::find(const MultiIndex& nu) const {
    auto it = lookup_.find(nu);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

unsigned MultiIndexSet::max_degree(std::size_t j) const { return j < dim_ ? max_degree_[j] : 0; }

MultiIndexSet MultiIndexSet::with_dim(std::size_t new_dim) const {
    return MultiIndexSet(new_dim, indices_);
}

MultiIndexSet MultiIndexSet::with_added(std::span<const MultiIndex> extra) const {
    std::vector<MultiIndex> all = indices_;
    std::set<MultiIndex> seen(all.begin(), all.end());
    for (const auto& nu : extra) {
        if (seen.insert(nu).second) all.push_back(nu);
    }
    return MultiIndexSet(dim_, std::move(all));
}

namespace {

// Univariate tables H_0..H_{max_degree(j)}(x_j) for every active coordinate.
std::vector<std::vector<double>> univariate_tables(const MultiIndexSet& set, std::span<const double> x) {
    std::vector<std::vector<double>> tables(set.dim());
    for (std::size_t j = 0; j < set.dim(); ++j) {
        tables[j].resize(set.max_degree(j) + 1);
        hermite_eval_into(x[j], tables[j]);
    }
    return tables;
}

double basis_value(const MultiIndex& nu, const std::vector<std::vector<double>>& tables) {
    double v = 1.0;
    for (const auto& [pos, deg] : nu.entries()) v *= tables[pos][deg];
    return v;
}

}  // namespace

double MultiIndexSet::christoffel_sum(std::span<const double> x) const {
    if (x.size() < dim_) throw std::invalid_argument("christoffel_sum: point dimension too small");
    const auto tables = univariate_tables(*this, x);
    double s = 0.0;
    for (const auto& nu : indices_) {
        const double v = basis_value(nu, tables);
        s += v * v;
    }
    return s;
}

Eigen::MatrixXd MultiIndexSet::basis_matrix(const Eigen::MatrixXd& points) const {
    if (static_cast<std::size_t>(points.cols()) < dim_) {
        throw std::invalid_argument("basis_matrix: point dimension too small");
    }
    Eigen::MatrixXd B(points.rows(), static_cast<Eigen::Index>(indices_.size()));
    std::vector<double> x(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) x[static_cast<std::size_t>(j)] = points(i, j);
        const auto tables = univariate_tables(*this, x);
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            B(i, static_cast<Eigen::Index>(k)) = basis_value(indices_[k], tables);
        }
    }
    return B;
}

double MultiIndexSet::evaluate(std::span<const double> coeffs, std::span<const double> x) const {
    if (coeffs.size() != indices_.size()) throw std::invalid_argument("evaluate: coefficient count mismatch");
    if (x.size() < dim_) throw std::invalid_argument("evaluate: point dimension too small");
    const auto tables = univariate_tables(*this, x);
    double s = 0.0;
    for (std::size_t k = 0; k < indices_.size(); ++k) s += coeffs[k] * basis_value(indices_[k], tables);
    return s;
}

std::vector<MultiIndex> reduced_margin(const MultiIndexSet& set) {
    std::set<MultiIndex> margin;
    for (const auto& nu : set.indices()) {
        for (std::size_t j = 0; j < set.dim(); ++j) {
            MultiIndex cand = nu.incremented(static_cast<std::uint32_t>(j));
            if (set.contains(cand) || margin.contains(cand)) continue;
            bool admissible = true;
            for (const auto& [pos, deg] : cand.entries()) {
                if (!set.contains(*cand.decremented(pos))) {
                    admissible = false;
                    break;
                }
            }
            if (admissible) margin.insert(std::move(cand));
        }
    }
    return {margin.begin(), margin.end()};
}

std::vector<MultiIndex> reduced_margin(std::size_t dim, std::span<const MultiIndex> indices) {
    if (!is_downward_closed(indices)) {
        throw std::invalid_argument("reduced_margin: input is not downward-closed");
    }
    return reduced_margin(MultiIndexSet(dim, {indices.begin(), indices.end()}));
}

std::size_t total_degree_size(std::size_t dim, unsigned degree) {
    // binom(dim + degree, degree), built incrementally to stay exact.
    std::size_t c = 1;
    for (unsigned k = 1; k <= degree; ++k) c = c * (dim + k) / k;
    return c;
}

void to_json(nlohmann::json& j, const MultiIndex& nu) {
    j = nlohmann::json::array();
    for (const auto& [pos, deg] : nu.entries()) j.push_back({pos, deg});
}

void from_json(const nlohmann::json& j, MultiIndex& nu) {
    std::vector<MultiIndex::Entry> entries;
    for (const auto& e : j) entries.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
    nu = MultiIndex::from_entries(std::move(entries));
}

void to_json(nlohmann::json& j, const MultiIndexSet& set) {
    j = nlohmann::json{{"dim", set.dim()}, {"indices", set.indices()}};
}

void from_json(const nlohmann::json& j, MultiIndexSet& set) {
    set = MultiIndexSet(j.at("dim").get<std::size_t>(), j.at("indices").get<std::vector<MultiIndex>>());
}

}  // namespace mlas
