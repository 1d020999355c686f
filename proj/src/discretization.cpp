#include "hestonlab/discretization.hpp"
#include "hestonlab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hestonlab {

std::string to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::interior: return "interior";
        case NodeKind::axis: return "axis";
        case NodeKind::dirichlet: return "dirichlet";
    }
    return "?";
}

std::string to_string(CrossStencil stencil) {
    return stencil == CrossStencil::directional ? "directional" : "four_point";
}

nlohmann::json MMatrixReport::to_json() const {
    nlohmann::json j;
    j["rows_checked"] = rows_checked;
    j["sign_violations"] = sign_violations;
    j["dominance_violations"] = dominance_violations;
    j["ok"] = ok();
    auto& ex = j["examples"] = nlohmann::json::array();
    for (const auto& v : examples) ex.push_back({{"row", v.row}, {"i", v.i}, {"j", v.j}, {"reason", v.reason}});
    return j;
}

std::vector<std::size_t> DiscreteSystem::equation_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < kind.size(); ++k)
        if (kind[k] != NodeKind::dirichlet) rows.push_back(k);
    return rows;
}

namespace {

// Weights of L at one node, indexed by neighbour offset (di, dj) in {-1,0,1}^2.
struct Stencil {
    double w[3][3] = {};
    double& at(int di, int dj) { return w[di + 1][dj + 1]; }
};

Stencil interior_stencil(const OperatorCoefficients& a, double hx, double hm, double hp,
                         const SchemeOptions& scheme) {
    Stencil s;
    s.at(1, 0) += a.a11 / (hx * hx);
    s.at(-1, 0) += a.a11 / (hx * hx);
    s.at(0, 0) -= 2.0 * a.a11 / (hx * hx);

    s.at(0, 1) += 2.0 * a.a22 / (hp * (hm + hp));
    s.at(0, -1) += 2.0 * a.a22 / (hm * (hm + hp));
    s.at(0, 0) -= 2.0 * a.a22 / (hm * hp);

    if (a.a12 != 0.0) {
        if (scheme.cross == CrossStencil::four_point) {
            const double c = a.a12 / (hx * (hm + hp));
            s.at(1, 1) += c;
            s.at(-1, -1) += c;
            s.at(-1, 1) -= c;
            s.at(1, -1) -= c;
        } else if (a.a12 > 0.0) {
            const double cp = a.a12 / (hx * hp), cm = a.a12 / (hx * hm);
            s.at(1, 1) += cp;
            s.at(1, 0) -= cp;
            s.at(0, 1) -= cp;
            s.at(-1, -1) += cm;
            s.at(-1, 0) -= cm;
            s.at(0, -1) -= cm;
            s.at(0, 0) += cp + cm;
        } else {
            const double cp = -a.a12 / (hx * hp), cm = -a.a12 / (hx * hm);
            s.at(1, -1) += cm;
            s.at(1, 0) -= cm;
            s.at(0, -1) -= cm;
            s.at(-1, 1) += cp;
            s.at(-1, 0) -= cp;
            s.at(0, 1) -= cp;
            s.at(0, 0) += cp + cm;
        }
    }

    // x drift
    if (a.b1 != 0.0) {
        const double half = a.b1 / (2.0 * hx);
        const double e = s.at(1, 0), w = s.at(-1, 0);
        const bool centred_ok = e + half >= 0.0 && w - half >= 0.0;
        const bool upwind_ok = a.b1 > 0.0 ? w >= 0.0 && e + a.b1 / hx >= 0.0 : e >= 0.0 && w - a.b1 / hx >= 0.0;
        if (scheme.hybrid_drift && (centred_ok || !upwind_ok)) {
            s.at(1, 0) += half;
            s.at(-1, 0) -= half;
        } else if (a.b1 > 0.0) {
            s.at(1, 0) += a.b1 / hx;
            s.at(0, 0) -= a.b1 / hx;
        } else {
            s.at(-1, 0) -= a.b1 / hx;
            s.at(0, 0) += a.b1 / hx;
        }
    }

    // y drift
    if (a.b2 != 0.0) {
        const double wn = a.b2 * hm / (hp * (hm + hp));
        const double ws = -a.b2 * hp / (hm * (hm + hp));
        const double wc = a.b2 * (hp - hm) / (hm * hp);
        const double n = s.at(0, 1), so = s.at(0, -1);
        const bool centred_ok = n + wn >= 0.0 && so + ws >= 0.0;
        const bool upwind_ok = a.b2 > 0.0 ? so >= 0.0 && n + a.b2 / hp >= 0.0 : n >= 0.0 && so - a.b2 / hm >= 0.0;
        if (scheme.hybrid_drift && (centred_ok || !upwind_ok)) {
            s.at(0, 1) += wn;
            s.at(0, -1) += ws;
            s.at(0, 0) += wc;
        } else if (a.b2 > 0.0) {
            s.at(0, 1) += a.b2 / hp;
            s.at(0, 0) -= a.b2 / hp;
        } else {
            s.at(0, -1) -= a.b2 / hm;
            s.at(0, 0) += a.b2 / hm;
        }
    }

    s.at(0, 0) += a.c;
    return s;
}

Stencil axis_stencil(const HestonParams& p, double hx, double hp) {
    Stencil s;
    const double b1 = p.r() - p.q();
    if (b1 > 0.0) {
        s.at(1, 0) += b1 / hx;
        s.at(0, 0) -= b1 / hx;
    } else if (b1 < 0.0) {
        s.at(-1, 0) -= b1 / hx;
        s.at(0, 0) += b1 / hx;
    }
    const double b2 = p.kappa() * p.theta();
    s.at(0, 1) += b2 / hp;
    s.at(0, 0) -= b2 / hp;
    s.at(0, 0) -= p.r();
    return s;
}

}  // namespace

DiscreteSystem build_system(const HestonParams& params, GridPtr grid, const GridFunction& g,
                            const GridFunction& f, const SchemeOptions& scheme,
                            std::span<const char> extra_dirichlet) {
    if (!grid) throw std::invalid_argument("build_system: null grid");
    const Grid& G = *grid;
    if (g.size() != G.size() || f.size() != G.size())
        throw std::invalid_argument("build_system: g and f must live on the system grid");
    if (!extra_dirichlet.empty() && extra_dirichlet.size() != G.size())
        throw std::invalid_argument("build_system: Dirichlet mask length does not match the grid");

    const std::size_t nx = G.nx(), ny = G.ny(), n = G.size();
    const bool axis = G.touches_axis();
    std::vector<NodeKind> kind(n, NodeKind::interior);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = G.index(i, j);
            const bool edge = i == 0 || i + 1 == nx || j + 1 == ny || (j == 0 && !axis);
            if (edge || (!extra_dirichlet.empty() && extra_dirichlet[k]))
                kind[k] = NodeKind::dirichlet;
            else if (j == 0)
                kind[k] = NodeKind::axis;
        }

    // Rows are assembled in parallel into per-row stencils, then packed.
    std::vector<Stencil> stencils(n);
    const double hx = G.hx();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(n); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        const std::size_t j = G.row(k);
        if (kind[k] == NodeKind::axis) {
            stencils[k] = axis_stencil(params, hx, G.y(1) - G.y(0));
        } else if (kind[k] == NodeKind::interior) {
            const double hm = G.y(j) - G.y(j - 1), hp = G.y(j + 1) - G.y(j);
            stencils[k] = interior_stencil(heston_coefficients(params, G.y(j)), hx, hm, hp, scheme);
        }
    }

    CsrBuilder builder(n);
    std::vector<double> rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (kind[k] == NodeKind::dirichlet) {
            builder.add(k, 1.0);
            rhs[k] = g[k];
        } else {
            const std::size_t i = G.col(k), j = G.row(k);
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const double w = stencils[k].at(di, dj);
                    if (w == 0.0) continue;
                    const std::size_t col = G.index(static_cast<std::size_t>(static_cast<long>(i) + di),
                                                    static_cast<std::size_t>(static_cast<long>(j) + dj));
                    builder.add(col, -w);
                }
            rhs[k] = f[k];
        }
        builder.finish_row(k);
    }

    DiscreteSystem sys{std::move(grid), params, scheme, builder.build(), std::move(rhs), std::move(kind), {}};
    sys.m_matrix = check_m_matrix(sys);
    return sys;
}

DiscreteSystem build_system(const HestonParams& params, GridPtr grid, const Obstacle& g, const Obstacle& f,
                            const SchemeOptions& scheme, std::span<const char> extra_dirichlet) {
    auto gv = sample(g, grid);
    auto fv = sample(f, grid);
    return build_system(params, std::move(grid), gv, fv, scheme, extra_dirichlet);
}

MMatrixReport check_m_matrix(const CsrMatrix& m, std::span<const NodeKind> kind, const Grid* grid) {
    MMatrixReport rep;
    auto note = [&](std::size_t row, std::string reason) {
        if (rep.examples.size() >= 50) return;
        MMatrixViolation v;
        v.row = row;
        if (grid) {
            v.i = grid->col(row);
            v.j = grid->row(row);
        }
        v.reason = std::move(reason);
        rep.examples.push_back(std::move(v));
    };
    for (std::size_t r = 0; r < m.rows; ++r) {
        ++rep.rows_checked;
        if (!kind.empty() && kind[r] == NodeKind::dirichlet) continue;
        double diag = 0.0, off = 0.0, worst = 0.0;
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            if (m.cols[k] == r) {
                diag = m.vals[k];
            } else {
                off += std::abs(m.vals[k]);
                worst = std::max(worst, m.vals[k]);
            }
        }
        if (diag <= 0.0 || worst > 0.0) {
            ++rep.sign_violations;
            note(r, diag <= 0.0 ? "nonpositive diagonal" : "positive off-diagonal " + std::to_string(worst));
        }
        if (diag < off * (1.0 - 1e-12)) {
            ++rep.dominance_violations;
            note(r, "diagonal " + std::to_string(diag) + " below off-diagonal sum " + std::to_string(off));
        }
    }
    return rep;
}

MMatrixReport check_m_matrix(const DiscreteSystem& system) {
    return check_m_matrix(system.matrix, system.kind, system.grid.get());
}

std::vector<double> multiply(const CsrMatrix& matrix, std::span<const double> u) {
    if (u.size() != matrix.rows) throw std::invalid_argument("multiply: dimension mismatch");
    std::vector<double> y(matrix.rows);
    kernels::matvec(matrix, u, y, kernels::Exec::parallel);
    return y;
}

GridFunction discrete_apply(const DiscreteSystem& system, const GridFunction& u) {
    if (u.size() != system.size()) throw std::invalid_argument("discrete_apply: dimension mismatch");
    auto mu = multiply(system.matrix, u.values());
    for (std::size_t k = 0; k < mu.size(); ++k)
        mu[k] = system.is_dirichlet(k) ? system.rhs[k] - u[k] : mu[k] - system.rhs[k];
    return GridFunction(system.grid, std::move(mu));
}

void write_coo(const DiscreteSystem& system, std::ostream& out) {
    const auto& m = system.matrix;
    out.precision(17);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            out << r << ' ' << m.cols[k] << ' ' << m.vals[k] << '\n';
}

nlohmann::json system_header(const DiscreteSystem& system) {
    const Grid& g = *system.grid;
    const auto& p = system.params;
    nlohmann::json j;
    j["grid"] = {{"nx", g.nx()}, {"ny", g.ny()}, {"x_min", g.x_min()}, {"x_max", g.x_max()},
                 {"y_min", g.y_min()}, {"y_max", g.y_max()}, {"grading", g.grading()}};
    j["params"] = {{"sigma", p.sigma()}, {"rho", p.rho_corr()}, {"r", p.r()}, {"q", p.q()},
                   {"kappa", p.kappa()}, {"theta", p.theta()}, {"gamma", p.gamma_weight()}};
    j["scheme"] = {{"cross_stencil", to_string(system.scheme.cross)}, {"hybrid_drift", system.scheme.hybrid_drift},
                   {"axis_row", "upwind u_x, forward u_y"}};
    j["rows"] = system.size();
    j["nnz"] = system.matrix.nnz();
    std::string mask;
    mask.reserve(system.size());
    for (auto k : system.kind) mask.push_back(k == NodeKind::dirichlet ? 'D' : k == NodeKind::axis ? 'A' : 'I');
    j["node_kinds"] = mask;
    j["m_matrix"] = system.m_matrix.to_json();
    return j;
}

}  // namespace hestonlab
