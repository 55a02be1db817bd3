#include "mlas/lognormal_pde.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

namespace mlas {

void ExpansionConfig::validate() const {
    const auto bad = [](const char* field, const char* why) {
        throw std::invalid_argument(std::string("benchmark.") + field + ": " + why);
    };
    if (d < 1) bad("d", "must be >= 1");
    if (!(alpha > 0.0)) bad("alpha", "must be > 0");
    if (!std::isfinite(b_bar)) bad("b_bar", "must be finite");
    if (n0 < 2) bad("n0", "must be >= 2");
    if (max_level < 0 || max_level > 10) bad("max_level", "must lie in [0, 10]");
    if (!(gamma > 0.0)) bad("gamma", "must be > 0");
    if (!std::isfinite(forcing)) bad("forcing", "must be finite");
}

void to_json(nlohmann::json& j, const ExpansionConfig& c) {
    j = {{"d", c.d},         {"alpha", c.alpha}, {"b_bar", c.b_bar},     {"n0", c.n0},
         {"max_level", c.max_level}, {"gamma", c.gamma}, {"forcing", c.forcing}};
}

void from_json(const nlohmann::json& j, ExpansionConfig& c) {
    ExpansionConfig out;
    out.d = j.value("d", out.d);
    out.alpha = j.value("alpha", out.alpha);
    out.b_bar = j.value("b_bar", out.b_bar);
    out.n0 = j.value("n0", out.n0);
    out.max_level = j.value("max_level", out.max_level);
    out.gamma = j.value("gamma", out.gamma);
    out.forcing = j.value("forcing", out.forcing);
    c = out;
}

double expansion_mode(const ExpansionConfig& cfg, std::size_t i, double x1, double x2) {
    if (i < 1) throw std::invalid_argument("expansion_mode: modes are numbered from 1");
    const std::size_t j = (i + 1) / 2;
    const double jd = static_cast<double>(j);
    const double scale = std::pow(jd, -cfg.alpha);
    return i % 2 == 0 ? scale * std::cos(jd * std::numbers::pi * x1) : scale * std::sin(jd * std::numbers::pi * x2);
}

Eigen::VectorXd log_coefficient(const ExpansionConfig& cfg, const Eigen::VectorXd& y, const Eigen::MatrixXd& points) {
    if (static_cast<std::size_t>(y.size()) != cfg.d) throw std::invalid_argument("log_coefficient: |y| != d");
    if (points.cols() != 2) throw std::invalid_argument("log_coefficient: points must have two columns");
    Eigen::VectorXd b = Eigen::VectorXd::Constant(points.rows(), cfg.b_bar);
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
        for (std::size_t i = 1; i <= cfg.d; ++i) {
            b[p] += y[static_cast<Eigen::Index>(i - 1)] * expansion_mode(cfg, i, points(p, 0), points(p, 1));
        }
    }
    return b;
}

double qoi(const DiscreteField& u) {
    const unsigned n = u.n;
    if (n == 0) return 0.0;
    if (u.values.size() != static_cast<Eigen::Index>((n + 1) * (n + 1))) {
        throw std::invalid_argument("qoi: field size does not match its grid");
    }
    // Each square splits into two triangles of area h²/2; the integral of a
    // linear function over a triangle is area × mean vertex value.
    const double h = u.h();
    double s = 0.0;
    for (unsigned j = 0; j < n; ++j) {
        for (unsigned i = 0; i < n; ++i) {
            const double v00 = u.at(i, j), v10 = u.at(i + 1, j), v01 = u.at(i, j + 1), v11 = u.at(i + 1, j + 1);
            s += (v00 + v10 + v11) + (v00 + v11 + v01);
        }
    }
    return s * h * h / 6.0;
}

namespace {

using Mat3 = Eigen::Matrix3d;

// Unit-coefficient P1 stiffness of a triangle: |T| ∇φ_a·∇φ_b.
Mat3 local_stiffness(const std::array<Eigen::Vector2d, 3>& p) {
    const double two_area = (p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[2] - p[0]).x() * (p[1] - p[0]).y();
    std::array<Eigen::Vector2d, 3> g;
    for (int a = 0; a < 3; ++a) {
        const auto& q1 = p[static_cast<std::size_t>((a + 1) % 3)];
        const auto& q2 = p[static_cast<std::size_t>((a + 2) % 3)];
        g[static_cast<std::size_t>(a)] = Eigen::Vector2d(q1.y() - q2.y(), q2.x() - q1.x()) / two_area;
    }
    Mat3 k;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) k(a, b) = 0.5 * two_area * g[static_cast<std::size_t>(a)].dot(g[static_cast<std::size_t>(b)]);
    }
    return k;
}

}  // namespace

struct LognormalPde::Level {
    unsigned n = 0;
    double h = 0.0;
    Eigen::Index ndof = 0;
    std::vector<Eigen::Index> dof;              // node → dof, −1 on the boundary
    std::vector<std::array<int, 3>> triangles;  // node indices, counterclockwise
    std::vector<int> kind;                      // 0: lower-right triangle, 1: upper-left
    std::array<Mat3, 2> k_local;
    Eigen::MatrixXd centroids;                  // nT × 2
    Eigen::MatrixXd psi;                        // d × nT, ψ_i at element centroids
    Eigen::SparseMatrix<double> pattern;        // full symmetric pattern, dofs in fill-reducing order
    std::vector<std::array<Eigen::Index, 9>> slots;  // valuePtr offsets per element, −1 if unused
    Eigen::VectorXd load;                       // ∫φ_i dx
};

struct LognormalPde::Solution {
    Eigen::VectorXd coeff;  // a at centroids
    Eigen::VectorXd u;      // dofs
    Eigen::VectorXd p;      // adjoint dofs
};

LognormalPde::LognormalPde(ExpansionConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const auto n = static_cast<std::size_t>(cfg_.max_level) + 1;
    once_ = std::make_unique<std::once_flag[]>(n);
    levels_.resize(n);
}

LognormalPde::~LognormalPde() = default;

unsigned LognormalPde::cells_per_side(int level) const {
    if (level < 0 || level > cfg_.max_level) throw std::out_of_range("level " + std::to_string(level) + " out of range");
    return cfg_.n0 << level;
}

double LognormalPde::work(int level) const {
    return std::pow(static_cast<double>(cells_per_side(level)), cfg_.gamma);
}

const LognormalPde::Level& LognormalPde::level_data(int level) const {
    const unsigned n = cells_per_side(level);
    const auto idx = static_cast<std::size_t>(level);
    std::call_once(once_[idx], [&] {
        auto lv = std::make_unique<Level>();
        lv->n = n;
        lv->h = 1.0 / n;
        const unsigned np = n + 1;
        const auto node = [np](unsigned i, unsigned j) { return static_cast<int>(j * np + i); };

        for (unsigned j = 0; j < n; ++j) {
            for (unsigned i = 0; i < n; ++i) {
                lv->triangles.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
                lv->kind.push_back(0);
                lv->triangles.push_back({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
                lv->kind.push_back(1);
            }
        }
        const double h = lv->h;
        lv->k_local[0] = local_stiffness({Eigen::Vector2d(0, 0), Eigen::Vector2d(h, 0), Eigen::Vector2d(h, h)});
        lv->k_local[1] = local_stiffness({Eigen::Vector2d(0, 0), Eigen::Vector2d(h, h), Eigen::Vector2d(0, h)});

        const auto nt = static_cast<Eigen::Index>(lv->triangles.size());
        lv->centroids.resize(nt, 2);
        for (Eigen::Index t = 0; t < nt; ++t) {
            Eigen::Vector2d c = Eigen::Vector2d::Zero();
            for (int v : lv->triangles[static_cast<std::size_t>(t)]) {
                c += Eigen::Vector2d(static_cast<double>(static_cast<unsigned>(v) % np), static_cast<double>(static_cast<unsigned>(v) / np));
            }
            lv->centroids.row(t) = (c * h / 3.0).transpose();
        }
        lv->psi.resize(static_cast<Eigen::Index>(cfg_.d), nt);
        for (Eigen::Index t = 0; t < nt; ++t) {
            for (std::size_t i = 1; i <= cfg_.d; ++i) {
                lv->psi(static_cast<Eigen::Index>(i - 1), t) = expansion_mode(cfg_, i, lv->centroids(t, 0), lv->centroids(t, 1));
            }
        }

        // Natural interior numbering, then a fill-reducing renumbering.
        std::vector<Eigen::Index> natural(static_cast<std::size_t>(np) * np, -1);
        Eigen::Index count = 0;
        for (unsigned j = 1; j < n; ++j) {
            for (unsigned i = 1; i < n; ++i) natural[static_cast<std::size_t>(node(i, j))] = count++;
        }
        lv->ndof = count;
        std::vector<Eigen::Triplet<double>> trip;
        for (const auto& tri : lv->triangles) {
            for (int a : tri) {
                for (int b : tri) {
                    const auto da = natural[static_cast<std::size_t>(a)], db = natural[static_cast<std::size_t>(b)];
                    if (da >= 0 && db >= 0) trip.emplace_back(da, db, 1.0);
                }
            }
        }
        Eigen::SparseMatrix<double> nat(count, count);
        nat.setFromTriplets(trip.begin(), trip.end());
        Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
        Eigen::AMDOrdering<int> amd;
        amd(nat, perm);
        // The ordering is returned as P⁻¹; old index i moves to P.indices()[i].
        const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> p = perm.inverse();
        lv->dof.assign(natural.size(), -1);
        for (std::size_t v = 0; v < natural.size(); ++v) {
            if (natural[v] >= 0) lv->dof[v] = p.indices()[natural[v]];
        }

        trip.clear();
        for (const auto& tri : lv->triangles) {
            for (int a : tri) {
                for (int b : tri) {
                    const auto da = lv->dof[static_cast<std::size_t>(a)], db = lv->dof[static_cast<std::size_t>(b)];
                    if (da >= 0 && db >= 0) trip.emplace_back(da, db, 1.0);
                }
            }
        }
        lv->pattern.resize(count, count);
        lv->pattern.setFromTriplets(trip.begin(), trip.end());
        lv->pattern.makeCompressed();
        const auto offset = [&](Eigen::Index r, Eigen::Index c) -> Eigen::Index {
            const auto* outer = lv->pattern.outerIndexPtr();
            const auto* inner = lv->pattern.innerIndexPtr();
            for (auto k = outer[c]; k < outer[c + 1]; ++k) {
                if (inner[k] == r) return k;
            }
            throw std::logic_error("stiffness pattern lookup failed");
        };
        for (const auto& tri : lv->triangles) {
            std::array<Eigen::Index, 9> s{};
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    const auto da = lv->dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])];
                    const auto db = lv->dof[static_cast<std::size_t>(tri[static_cast<std::size_t>(b)])];
                    s[static_cast<std::size_t>(3 * a + b)] = (da >= 0 && db >= 0) ? offset(da, db) : -1;
                }
            }
            lv->slots.push_back(s);
        }

        lv->load = Eigen::VectorXd::Zero(count);
        for (const auto& tri : lv->triangles) {
            for (int a : tri) {
                const auto da = lv->dof[static_cast<std::size_t>(a)];
                if (da >= 0) lv->load[da] += h * h / 6.0;
            }
        }
        levels_[idx] = std::move(lv);
    });
    return *levels_[idx];
}

Eigen::MatrixXd LognormalPde::centroids(int level) const { return level_data(level).centroids; }

Eigen::SparseMatrix<double> LognormalPde::stiffness(int level, const Eigen::VectorXd& y) const {
    if (static_cast<std::size_t>(y.size()) != cfg_.d) throw std::invalid_argument("LognormalPde: |y| != d");
    const Level& lv = level_data(level);
    const Eigen::VectorXd coeff = (cfg_.b_bar + (lv.psi.transpose() * y).array()).exp().matrix();
    Eigen::SparseMatrix<double> a = lv.pattern;
    double* val = a.valuePtr();
    std::fill(val, val + a.nonZeros(), 0.0);
    for (std::size_t t = 0; t < lv.triangles.size(); ++t) {
        const Mat3& k = lv.k_local[static_cast<std::size_t>(lv.kind[t])];
        const double c = coeff[static_cast<Eigen::Index>(t)];
        const auto& s = lv.slots[t];
        for (int e = 0; e < 9; ++e) {
            if (s[static_cast<std::size_t>(e)] >= 0) val[s[static_cast<std::size_t>(e)]] += c * k(e / 3, e % 3);
        }
    }
    return a;
}

LognormalPde::Solution LognormalPde::solve_full(int level, const Eigen::VectorXd& y, bool with_adjoint) const {
    const Level& lv = level_data(level);
    const Eigen::SparseMatrix<double> a = stiffness(level, y);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(a);
    assert(llt.info() == Eigen::Success && "stiffness matrix must be positive definite");
    if (llt.info() != Eigen::Success) throw std::runtime_error("LognormalPde: factorization failed");
    Solution s;
    s.coeff = (cfg_.b_bar + (lv.psi.transpose() * y).array()).exp().matrix();
    s.u = llt.solve(cfg_.forcing * lv.load);
    if (with_adjoint) s.p = llt.solve(lv.load);
    return s;
}

DiscreteField LognormalPde::solve(int level, const Eigen::VectorXd& y) const {
    const Level& lv = level_data(level);
    const Solution s = solve_full(level, y, false);
    DiscreteField f{level, lv.n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lv.dof.size()))};
    for (std::size_t v = 0; v < lv.dof.size(); ++v) {
        if (lv.dof[v] >= 0) f.values[static_cast<Eigen::Index>(v)] = s.u[lv.dof[v]];
    }
    return f;
}

DiscreteField LognormalPde::adjoint(int level, const Eigen::VectorXd& y) const {
    const Level& lv = level_data(level);
    const Solution s = solve_full(level, y, true);
    DiscreteField f{level, lv.n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lv.dof.size()))};
    for (std::size_t v = 0; v < lv.dof.size(); ++v) {
        if (lv.dof[v] >= 0) f.values[static_cast<Eigen::Index>(v)] = s.p[lv.dof[v]];
    }
    return f;
}

double LognormalPde::value(int level, const Eigen::VectorXd& y) const {
    const Level& lv = level_data(level);
    return lv.load.dot(solve_full(level, y, false).u);
}

ValueAndGradient LognormalPde::value_and_gradient(int level, const Eigen::VectorXd& y) const {
    const Level& lv = level_data(level);
    const Solution s = solve_full(level, y, true);
    // ∂f/∂y_i = −pᵀ (∂A/∂y_i) u, and ∂A/∂y_i collects ψ_i(c_T)·a_T·K_T.
    Eigen::VectorXd energy(static_cast<Eigen::Index>(lv.triangles.size()));
    for (std::size_t t = 0; t < lv.triangles.size(); ++t) {
        Eigen::Vector3d ut = Eigen::Vector3d::Zero(), pt = Eigen::Vector3d::Zero();
        for (int a = 0; a < 3; ++a) {
            const auto da = lv.dof[static_cast<std::size_t>(lv.triangles[t][static_cast<std::size_t>(a)])];
            if (da >= 0) {
                ut[a] = s.u[da];
                pt[a] = s.p[da];
            }
        }
        energy[static_cast<Eigen::Index>(t)] =
            s.coeff[static_cast<Eigen::Index>(t)] * pt.dot(lv.k_local[static_cast<std::size_t>(lv.kind[t])] * ut);
    }
    return {lv.load.dot(s.u), -(lv.psi * energy)};
}

Eigen::VectorXd LognormalPde::gradient(int level, const Eigen::VectorXd& y) const {
    return value_and_gradient(level, y).gradient;
}

Eigen::VectorXd LognormalPde::grad_qoi(int level, const Eigen::VectorXd& y) const { return gradient(level, y); }

}  // namespace mlas
