#include "hestonlab/lcp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace hestonlab {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

SpMat to_eigen(const CsrMatrix& a) {
    std::vector<Eigen::Triplet<double, int>> t;
    t.reserve(a.nnz());
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            t.emplace_back(static_cast<int>(r), static_cast<int>(a.cols[k]), a.vals[k]);
    SpMat m(static_cast<int>(a.rows), static_cast<int>(a.rows));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void residuals(const CsrMatrix& m, std::span<const double> rhs, std::span<const NodeKind> kind,
               std::span<const double> psi, std::span<const double> u, double& lin, double& comp) {
    std::vector<double> mu(m.rows);
    kernels::matvec(m, u, mu, kernels::Exec::parallel);
    lin = 0.0;
    comp = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (kind[i] == NodeKind::dirichlet) continue;
        const double eq = mu[i] - rhs[i];
        lin = std::max(lin, -eq);
        comp = std::max(comp, std::abs(std::min(eq, u[i] - psi[i])));
    }
}

RawLcpResult run_psor(const CsrMatrix& m, std::span<const double> rhs, std::span<const NodeKind> kind,
                      std::span<const double> psi, const LcpOptions& opt) {
    const std::size_t n = m.rows;
    const std::size_t max_iter = opt.max_iter ? opt.max_iter : 200000;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
        if (kind[i] != NodeKind::dirichlet) rows.push_back(i);
    const auto colours = colour_rows(m, rows);

    std::vector<double> start(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double guess = opt.initial_guess.empty() ? psi[i] : std::max(opt.initial_guess[i], psi[i]);
        start[i] = kind[i] == NodeKind::dirichlet ? rhs[i] : guess;
    }
    std::vector<double> lower(psi.begin(), psi.end());

    double omega = opt.omega;
    std::size_t total = 0;
    double best = INFINITY;
    for (int attempt = 0; attempt < 6; ++attempt) {
        std::vector<double> u = start;
        double lin = 0.0, comp = 0.0;
        residuals(m, rhs, kind, psi, u, lin, comp);
        const double initial = std::max(comp, 1.0);
        bool diverged = false;
        for (std::size_t it = 1; it <= max_iter; ++it) {
            const double change = kernels::psor_sweep(m, rhs, lower, colours, omega, u, opt.exec);
            ++total;
            if (!std::isfinite(change)) {
                diverged = true;
                break;
            }
            // The full residual costs one extra product; check every 10 sweeps.
            if (change <= opt.tol || it % 10 == 0) {
                residuals(m, rhs, kind, psi, u, lin, comp);
                best = std::min(best, comp);
                if (!std::isfinite(comp) || comp > 1e6 * initial) {
                    diverged = true;
                    break;
                }
                if (comp <= opt.tol && change <= opt.tol)
                    return {std::move(u), lin, comp, it, omega};
            }
        }
        if (!diverged) break;
        omega *= 0.5;
    }
    throw SolveError("psor: no convergence (omega " + std::to_string(omega) + ")", best, total);
}

CsrMatrix with_identity_rows(const CsrMatrix& m, const std::vector<char>& identity) {
    CsrBuilder b(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (identity[r]) {
            b.add(r, 1.0);
        } else {
            for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) b.add(m.cols[k], m.vals[k]);
        }
        b.finish_row(r);
    }
    return b.build();
}

RawLcpResult run_policy(const CsrMatrix& m, std::span<const double> rhs, std::span<const NodeKind> kind,
                        std::span<const double> psi, const LcpOptions& opt) {
    const std::size_t n = m.rows;
    const std::size_t max_policies = opt.max_iter ? opt.max_iter : 50;
    std::vector<double> u;
    std::vector<char> policy(n, 0);
    std::vector<double> mu(n), b(n);
    if (opt.initial_guess.empty()) {
        u = solve_linear(m, rhs, opt.tol);
    } else {
        // Warm start: contact where the guess touches psi. The guess itself
        // is not used, its discrete residual is usually noise.
        const double touch = 1e-7 * std::max(1.0, inf_norm(psi));
        for (std::size_t i = 0; i < n; ++i)
            if (kind[i] != NodeKind::dirichlet) policy[i] = opt.initial_guess[i] - psi[i] <= touch;
        for (std::size_t i = 0; i < n; ++i) b[i] = policy[i] ? psi[i] : rhs[i];
        u = solve_linear(with_identity_rows(m, policy), b, opt.tol);
    }
    for (std::size_t it = 1; it <= max_policies; ++it) {
        kernels::matvec(m, u, mu, kernels::Exec::parallel);
        // A node switches only when the other branch wins by more than the
        // round-off of its row; exact ties keep the current choice, which
        // stops two-cycles on badly scaled systems.
        std::vector<char> next(policy);
        for (std::size_t i = 0; i < n; ++i) {
            if (kind[i] == NodeKind::dirichlet) continue;
            double scale = std::abs(rhs[i]) + std::abs(psi[i]);
            for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) scale += std::abs(m.vals[k] * u[m.cols[k]]);
            const double slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;
            const double eq = mu[i] - rhs[i], gap = u[i] - psi[i];
            if (policy[i] ? eq < gap - slack : eq > gap + slack) next[i] = !policy[i];
        }
        if (next == policy) {
            RawLcpResult res{std::move(u), 0, 0, it - 1, 0.0};
            residuals(m, rhs, kind, psi, res.u, res.residual_lin, res.residual_comp);
            return res;
        }
        policy = std::move(next);
        for (std::size_t i = 0; i < n; ++i) b[i] = policy[i] ? psi[i] : rhs[i];
        u = solve_linear(with_identity_rows(m, policy), b, opt.tol);
    }
    double lin = 0.0, comp = 0.0;
    residuals(m, rhs, kind, psi, u, lin, comp);
    throw SolveError("policy iteration: policy still changing after " + std::to_string(max_policies) + " steps",
                     comp, max_policies);
}

}  // namespace

std::vector<double> solve_linear(const CsrMatrix& a, std::span<const double> b, double tol, std::size_t max_iter) {
    if (b.size() != a.rows) throw std::invalid_argument("solve_linear: dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_linear: tol must be > 0");
    const SpMat m = to_eigen(a);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw SolveError("solve_linear: factorisation failed (singular matrix?)", INFINITY, 0);
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = lu.solve(rhs);
    // Refine until the residual stops halving. Accept it below tol (1 + |b|)
    // or, for badly scaled systems, below a small multiple of the backward
    // stable level eps (|A| |x| + |b|).
    double a_norm = 0.0;
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) s += std::abs(a.vals[k]);
        a_norm = std::max(a_norm, s);
    }
    Eigen::VectorXd r = rhs - m * x;
    double res = r.lpNorm<Eigen::Infinity>();
    double best = res;
    Eigen::VectorXd best_x = x;
    for (std::size_t it = 0; it < max_iter && res > 0.0; ++it) {
        x += lu.solve(r);
        r = rhs - m * x;
        res = r.lpNorm<Eigen::Infinity>();
        if (!(res < 0.5 * best)) {
            if (res < best) {
                best = res;
                best_x = x;
            }
            break;
        }
        best = res;
        best_x = x;
    }
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         (a_norm * best_x.lpNorm<Eigen::Infinity>() + inf_norm(b));
    const double target = std::max(tol * (1.0 + inf_norm(b)), floor);
    if (!(best <= target))
        throw SolveError("solve_linear: residual " + std::to_string(best) + " above " + std::to_string(target), best,
                         max_iter);
    return std::vector<double>(best_x.data(), best_x.data() + best_x.size());
}

GridFunction solve_dirichlet(const DiscreteSystem& system, double tol, std::size_t max_iter) {
    return GridFunction(system.grid, solve_linear(system.matrix, system.rhs, tol, max_iter));
}

std::string to_string(LcpMethod method) { return method == LcpMethod::psor ? "psor" : "policy_iteration"; }

LcpMethod lcp_method_from_string(const std::string& name) {
    if (name == "psor") return LcpMethod::psor;
    if (name == "policy_iteration") return LcpMethod::policy_iteration;
    throw std::invalid_argument("unknown LCP method '" + name + "' (expected psor or policy_iteration)");
}

std::string to_string(Region region) {
    switch (region) {
        case Region::exercise: return "exercise";
        case Region::continuation: return "continuation";
        case Region::dirichlet: return "dirichlet";
    }
    return "?";
}

RawLcpResult solve_lcp(const CsrMatrix& m, std::span<const double> rhs, std::span<const NodeKind> kind,
                       std::span<const double> psi, const LcpOptions& options) {
    if (rhs.size() != m.rows || kind.size() != m.rows || psi.size() != m.rows)
        throw std::invalid_argument("solve_lcp: dimension mismatch");
    if (!(options.tol > 0.0)) throw std::invalid_argument("solve_lcp: tol must be > 0");
    if (!(options.omega > 0.0 && options.omega < 2.0)) throw std::invalid_argument("solve_lcp: omega must lie in (0, 2)");
    if (!options.initial_guess.empty() && options.initial_guess.size() != m.rows)
        throw std::invalid_argument("solve_lcp: initial guess has the wrong length");
    for (std::size_t i = 0; i < m.rows; ++i)
        if (kind[i] == NodeKind::dirichlet && psi[i] > rhs[i] + options.tol)
            throw std::invalid_argument("solve_lcp: obstacle exceeds Dirichlet data at row " + std::to_string(i));
    return options.method == LcpMethod::psor ? run_psor(m, rhs, kind, psi, options)
                                             : run_policy(m, rhs, kind, psi, options);
}

double default_tol_region(const GridFunction& psi) { return 1e-7 * std::max(1.0, inf_norm(psi.values())); }

LCPSolution solve_obstacle(const DiscreteSystem& system, const GridFunction& psi, const LcpOptions& options,
                           double tol_region) {
    if (psi.size() != system.size()) throw std::invalid_argument("solve_obstacle: psi must live on the system grid");
    const auto t0 = std::chrono::steady_clock::now();
    auto raw = solve_lcp(system.matrix, system.rhs, system.kind, psi.values(), options);
    const auto t1 = std::chrono::steady_clock::now();
    LCPSolution sol;
    sol.u = GridFunction(system.grid, std::move(raw.u));
    sol.residual_lin = raw.residual_lin;
    sol.residual_comp = raw.residual_comp;
    sol.iterations = raw.iterations;
    sol.wall_time = std::chrono::duration<double>(t1 - t0).count();
    sol.method = options.method;
    sol.tol = options.tol;
    sol.omega = raw.omega;
    sol.tol_region = tol_region >= 0.0 ? tol_region : default_tol_region(psi);
    sol.active_mask = classify_regions(sol.u, psi, system.kind, sol.tol_region).labels;
    return sol;
}

GridFunction Reduction::recover(const GridFunction& reduced_u) const {
    std::vector<double> u(reduced_u.values().begin(), reduced_u.values().end());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += v[k];
    return GridFunction(reduced_u.grid_ptr(), std::move(u));
}

Reduction reduce_to_homogeneous(const DiscreteSystem& system, const GridFunction& psi, double tol) {
    std::vector<double> b(system.rhs);
    for (std::size_t k = 0; k < b.size(); ++k)
        if (system.is_dirichlet(k)) b[k] = 0.0;
    GridFunction v(system.grid, solve_linear(system.matrix, b, tol));
    DiscreteSystem reduced = system;
    for (std::size_t k = 0; k < b.size(); ++k)
        if (!system.is_dirichlet(k)) reduced.rhs[k] = 0.0;
    std::vector<double> p(psi.values().begin(), psi.values().end());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] -= v[k];
    return {std::move(reduced), GridFunction(system.grid, std::move(p)), std::move(v)};
}

RegionMap classify_regions(const LCPSolution& sol, const GridFunction& psi, double tol_region) {
    std::vector<NodeKind> kind(sol.active_mask.size());
    for (std::size_t k = 0; k < kind.size(); ++k)
        kind[k] = sol.active_mask[k] == Region::dirichlet ? NodeKind::dirichlet : NodeKind::interior;
    return classify_regions(sol.u, psi, kind, tol_region);
}

RegionMap classify_regions(const GridFunction& u, const GridFunction& psi, std::span<const NodeKind> kind,
                           double tol_region) {
    const Grid& g = u.grid();
    if (psi.size() != u.size() || kind.size() != u.size())
        throw std::invalid_argument("classify_regions: size mismatch");
    RegionMap out;
    out.tol_region = tol_region;
    out.labels.resize(u.size());
    std::vector<double> phi(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        phi[k] = u[k] - psi[k] - tol_region;
        if (kind[k] == NodeKind::dirichlet) {
            out.labels[k] = Region::dirichlet;
        } else if (phi[k] <= 0.0) {
            out.labels[k] = Region::exercise;
            ++out.exercise;
        } else {
            out.labels[k] = Region::continuation;
            ++out.continuation;
        }
    }

    // Marching squares. Edge ids: horizontal (i,j)-(i+1,j) -> 2k, vertical (i,j)-(i,j+1) -> 2k+1.
    const std::size_t nx = g.nx(), ny = g.ny();
    auto cross = [&](std::size_t a, std::size_t b) {
        const double t = phi[a] / (phi[a] - phi[b]);
        const Point pa = g.node(a), pb = g.node(b);
        return Point{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
    };
    struct Segment {
        std::size_t e0, e1;
        Point p0, p1;
    };
    std::vector<Segment> segs;
    for (std::size_t j = 0; j + 1 < ny; ++j)
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const std::size_t k00 = g.index(i, j), k10 = g.index(i + 1, j);
            const std::size_t k01 = g.index(i, j + 1), k11 = g.index(i + 1, j + 1);
            if (kind[k00] == NodeKind::dirichlet || kind[k10] == NodeKind::dirichlet ||
                kind[k01] == NodeKind::dirichlet || kind[k11] == NodeKind::dirichlet)
                continue;
            // Edges in cyclic order: bottom, right, top, left.
            const std::size_t ends[4][2] = {{k00, k10}, {k10, k11}, {k01, k11}, {k00, k01}};
            const std::size_t ids[4] = {2 * k00, 2 * k10 + 1, 2 * k01, 2 * k00 + 1};
            std::vector<int> hit;
            for (int e = 0; e < 4; ++e)
                if ((phi[ends[e][0]] > 0.0) != (phi[ends[e][1]] > 0.0)) hit.push_back(e);
            auto add = [&](int a, int b) {
                segs.push_back({ids[a], ids[b], cross(ends[a][0], ends[a][1]), cross(ends[b][0], ends[b][1])});
            };
            if (hit.size() == 2) {
                add(hit[0], hit[1]);
            } else if (hit.size() == 4) {
                // Saddle: join edges around the corners that agree with the centre value.
                const double centre = 0.25 * (phi[k00] + phi[k10] + phi[k01] + phi[k11]);
                if ((centre > 0.0) == (phi[k00] > 0.0)) {
                    add(0, 1);
                    add(2, 3);
                } else {
                    add(0, 3);
                    add(1, 2);
                }
            }
        }

    std::multimap<std::size_t, std::size_t> by_edge;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        by_edge.emplace(segs[s].e0, s);
        by_edge.emplace(segs[s].e1, s);
    }
    std::vector<char> used(segs.size(), 0);
    auto next_segment = [&](std::size_t edge, std::size_t from) -> std::size_t {
        auto [lo, hi] = by_edge.equal_range(edge);
        for (auto it = lo; it != hi; ++it)
            if (it->second != from && !used[it->second]) return it->second;
        return static_cast<std::size_t>(-1);
    };
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        used[s0] = 1;
        std::vector<Point> fwd{segs[s0].p0, segs[s0].p1};
        std::vector<Point> back;
        // Walk both directions from the seed segment.
        for (int dir = 0; dir < 2; ++dir) {
            std::size_t edge = dir == 0 ? segs[s0].e1 : segs[s0].e0;
            std::size_t cur = s0;
            for (;;) {
                const std::size_t nxt = next_segment(edge, cur);
                if (nxt == static_cast<std::size_t>(-1)) break;
                used[nxt] = 1;
                const bool forward = segs[nxt].e0 == edge;
                const Point p = forward ? segs[nxt].p1 : segs[nxt].p0;
                edge = forward ? segs[nxt].e1 : segs[nxt].e0;
                (dir == 0 ? fwd : back).push_back(p);
                cur = nxt;
            }
        }
        std::vector<Point> line(back.rbegin(), back.rend());
        line.insert(line.end(), fwd.begin(), fwd.end());
        out.free_boundary.push_back(std::move(line));
    }
    return out;
}

void write_solution_csv(std::ostream& out, const GridFunction& u, const GridFunction& psi,
                        std::span<const Region> labels) {
    const Grid& g = u.grid();
    out.precision(17);
    out << "x,y,u,psi,region\n";
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Point p = g.node(k);
        out << p.x << ',' << p.y << ',' << u[k] << ',' << psi[k] << ',' << to_string(labels[k]) << '\n';
    }
}

void write_free_boundary_csv(std::ostream& out, const RegionMap& regions) {
    out.precision(17);
    out << "curve,index,x,y\n";
    for (std::size_t c = 0; c < regions.free_boundary.size(); ++c)
        for (std::size_t k = 0; k < regions.free_boundary[c].size(); ++k)
            out << c << ',' << k << ',' << regions.free_boundary[c][k].x << ',' << regions.free_boundary[c][k].y
                << '\n';
}

nlohmann::json solution_manifest(const DiscreteSystem& system, const LCPSolution& sol) {
    nlohmann::json j = system_header(system);
    j.erase("node_kinds");
    j["method"] = to_string(sol.method);
    j["tol"] = sol.tol;
    j["tol_region"] = sol.tol_region;
    j["omega"] = sol.omega;
    j["residual_lin"] = sol.residual_lin;
    j["residual_comp"] = sol.residual_comp;
    j["iterations"] = sol.iterations;
    return j;
}

}  // namespace hestonlab
