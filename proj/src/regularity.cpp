#include "hestonlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace hestonlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Contact threshold of local solves relative to max(1, |psi|). Policy
// iteration sets contact rows to psi exactly, so this only has to absorb
// round-off; the default region threshold would displace the contour by
// sqrt(tol / D^2 u), a visible fraction of the smallest probe balls.
constexpr double kLocalContact = 1e-12;

// Smallest admissible K; the estimates need K > 2.
const double kKFloor = std::nextafter(2.0, 3.0);

std::vector<char> outside_ball_mask(const Grid& g, Point c, double radius) {
    std::vector<char> mask(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point p = g.node(k);
        const double dx = p.x - c.x, dy = p.y - c.y;
        mask[k] = dx * dx + dy * dy > radius * radius * (1.0 + 1e-12);
    }
    return mask;
}

// B (1 + sin(pi xt) cos(pi yt) / 2) with xt = (x - x0)/R, yt = (y - y0)/R.
Jet2 manufactured(Point p, Point c, double radius, double scale) {
    const double k = std::numbers::pi / radius;
    const double sx = std::sin(k * (p.x - c.x)), cx = std::cos(k * (p.x - c.x));
    const double sy = std::sin(k * (p.y - c.y)), cy = std::cos(k * (p.y - c.y));
    const double h = 0.5 * scale;
    return {scale + h * sx * cy, h * k * cx * cy, -h * k * sx * sy, -h * k * k * sx * cy, -h * k * k * cx * sy,
            -h * k * k * sx * cy};
}

template <class SourceFn>
AuxiliarySolve run_auxiliary(const HestonParams& params, AuxiliarySolve aux, SourceFn source,
                             const AuxOptions& options) {
    if (options.ladder.empty()) throw std::invalid_argument("auxiliary solve: empty sub-grid ladder");
    for (std::size_t level = 0; level < options.ladder.size(); ++level) {
        auto grid = std::make_shared<const Grid>(ball_patch(params, aux.p0, aux.radius, options.ladder[level]));
        const auto mask = outside_ball_mask(*grid, aux.p0, aux.radius);
        GridFunction g(grid, aux.boundary_value);
        auto f = GridFunction::sample(grid, source);
        const auto system = build_system(params, grid, g, f, options.scheme, mask);
        auto sol = solve_dirichlet(system, options.tol);

        // Manufactured solution on the same sub-grid and mask.
        const double scale = aux.boundary_value != 0.0 ? aux.boundary_value : 1.0;
        std::vector<double> b(system.size()), exact(system.size());
        for (std::size_t k = 0; k < b.size(); ++k) {
            const Point p = grid->node(k);
            const Jet2 v = manufactured(p, aux.p0, aux.radius, scale);
            exact[k] = v.u;
            b[k] = system.is_dirichlet(k) ? v.u : -apply_L(params, v, p);
        }
        const auto approx = solve_linear(system.matrix, b, options.tol);

        SubgridLevel lv;
        lv.nx = grid->nx();
        lv.ny = grid->ny();
        lv.hx = grid->hx();
        lv.hy = grid->y(1) - grid->y(0);
        lv.min = INFINITY;
        lv.max = -INFINITY;
        for (std::size_t k = 0; k < sol.size(); ++k) {
            if (system.is_dirichlet(k)) continue;
            lv.min = std::min(lv.min, sol[k]);
            lv.max = std::max(lv.max, sol[k]);
            lv.slack = std::max(lv.slack, std::abs(approx[k] - exact[k]));
        }
        if (aux.boundary_value == 0.0) lv.slack = 0.0;
        if (!std::isfinite(lv.min)) throw std::invalid_argument("auxiliary solve: ball holds no free node");
        lv.lower_ok = lv.min >= aux.lower_bound - lv.slack;
        lv.upper_ok = lv.max <= aux.upper_bound + lv.slack;
        lv.m_matrix_violations = system.m_matrix.sign_violations + system.m_matrix.dominance_violations;
        aux.levels.push_back(lv);
        if (level + 1 == options.ladder.size()) {
            aux.solution = std::move(sol);
            aux.in_ball.resize(mask.size());
            for (std::size_t k = 0; k < mask.size(); ++k) aux.in_ball[k] = !mask[k];
        }
    }
    return aux;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

AffineFunction linear_approx(const Obstacle& psi, Point p0) {
    const Jet2 j = psi.jet(p0);
    if (!std::isfinite(j.ux) || !std::isfinite(j.uy))
        throw std::invalid_argument("linear_approx: gradient unavailable at the anchor");
    return {p0, j.u, j.ux, j.uy};
}

TaylorCheck taylor_check(const Obstacle& psi, Point p0, double rho, double c11, std::size_t n) {
    if (n < 2) throw std::invalid_argument("taylor_check: need n >= 2");
    const auto l = linear_approx(psi, p0);
    const double R = rho * p0.y;
    TaylorCheck out;
    out.bound = 2.0 * p0.y * p0.y * rho * rho * c11;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double dx = -R + 2.0 * R * static_cast<double>(a) / static_cast<double>(n - 1);
            const double dy = -R + 2.0 * R * static_cast<double>(b) / static_cast<double>(n - 1);
            if (dx * dx + dy * dy > R * R || p0.y + dy < 0.0) continue;
            const Point p{p0.x + dx, p0.y + dy};
            out.max_residual = std::max(out.max_residual, std::abs(psi.value(p) - l(p)));
            ++out.samples;
        }
    out.ok = out.max_residual <= out.bound * (1.0 + 1e-12) + 1e-15;
    return out;
}

double interior_rho0(const HestonParams& params, double R0) {
    double r0 = std::min({1.0, barrier_rho0(params), R0 / 5.0});
    if (params.r() > 0.0) r0 = std::min(r0, 1.0 / std::sqrt(params.r()));
    return r0;
}

double boundary_rho0(const HestonParams& params, double R0) {
    double r0 = std::min({1.0, params.theta() / 4.0, R0 / 5.0});
    if (params.r() > 0.0) r0 = std::min(r0, params.kappa() * params.theta() / (9.0 * params.r()));
    return r0;
}

double affine_sup(double a, double bx, double by, const DomainWindow& w) {
    auto f = [&](double x, double y) { return std::abs(a + bx * x + by * y); };
    if (w.shape() == DomainWindow::Shape::rectangle)
        return std::max({f(w.x_lo(), w.y_lo()), f(w.x_hi(), w.y_lo()), f(w.x_lo(), w.y_hi()), f(w.x_hi(), w.y_hi())});
    const Point c = w.center();
    const double R = w.radius();
    double best = 0.0;
    const double nb = std::hypot(bx, by);
    if (nb == 0.0) return std::abs(a + bx * c.x + by * c.y);
    for (double s : {1.0, -1.0}) {
        const double x = c.x + s * R * bx / nb, y = c.y + s * R * by / nb;
        if (y >= 0.0) best = std::max(best, f(x, y));
    }
    if (c.y - R < 0.0) {
        const double half = std::sqrt(std::max(0.0, R * R - c.y * c.y));
        best = std::max({best, f(c.x - half, 0.0), f(c.x + half, 0.0)});
    }
    return best;
}

nlohmann::json Constants::to_json() const {
    return {{"K", K}, {"K_prime", K_prime}, {"K_raw", K_raw}, {"K_prime_raw", K_prime_raw}, {"psi_c11", psi_c11},
            {"M", M}, {"N", N}, {"zero_obstacle", zero_obstacle}, {"K_floor", kKFloor}};
}

Constants measure_constants(const Obstacle& psi, const DomainWindow& window, const HestonParams& params,
                            std::size_t n) {
    Constants c;
    c.psi_c11 = c11_norm(psi, window, n);
    if (c.psi_c11 == 0.0) {
        c.zero_obstacle = true;
        return c;
    }
    const auto l = linear_approx(psi, window.center());
    const double r = params.r(), q = params.q(), kappa = params.kappa(), theta = params.theta();
    // L l = a + bx x + by y
    const double a = (r - q) * l.gx + kappa * theta * l.gy - r * (l.value - l.gx * l.p0.x - l.gy * l.p0.y);
    const double bx = -r * l.gx;
    const double by = -0.5 * l.gx - kappa * l.gy - r * l.gy;
    c.K_raw = affine_sup(a, bx, by, window) / c.psi_c11;

    double sup_lpsi = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double x = window.x_lo() + (window.x_hi() - window.x_lo()) * static_cast<double>(i) / static_cast<double>(n - 1);
            const double y = window.y_lo() + (window.y_hi() - window.y_lo()) * static_cast<double>(j) / static_cast<double>(n - 1);
            if (!window.contains({x, y})) continue;
            sup_lpsi = std::max(sup_lpsi, std::abs(apply_L(params, psi.jet({x, y}), {x, y})));
        }
    c.K_prime_raw = sup_lpsi / (kappa * theta * c.psi_c11);
    c.K = std::max(c.K_raw, kKFloor);
    c.K_prime = std::max(c.K_prime_raw, kKFloor);
    c.M = c.K * c.psi_c11;
    c.N = c.K_prime * c.psi_c11;
    return c;
}

Grid ball_patch(const HestonParams& params, Point centre, double radius, std::size_t nx) {
    if (nx < 5) throw std::invalid_argument("ball_patch: need at least 5 nodes across");
    const double hx = 2.0 * radius / static_cast<double>(nx - 1);
    const double y_lo = std::max(0.0, centre.y - radius), y_hi = centre.y + radius;
    const double hy = std::abs(params.sigma()) * hx;
    const auto ny = std::max<std::size_t>(5, static_cast<std::size_t>(std::lround((y_hi - y_lo) / hy)) + 1);
    return Grid::patch(centre.x - radius, centre.x + radius, y_lo, y_hi, nx, ny);
}

bool AuxiliarySolve::pass() const {
    if (levels.empty()) return false;
    const auto& f = levels.back();
    return f.lower_ok && f.upper_ok && f.slack <= 0.05 * lower_bound;
}

nlohmann::json AuxiliarySolve::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["anchor"] = {p0.x, p0.y};
    j["rho"] = rho;
    j["radius"] = radius;
    j["scale"] = scale;
    j["boundary_value"] = boundary_value;
    j["lower_bound"] = lower_bound;
    j["upper_bound"] = upper_bound;
    j["pass"] = pass();
    auto& lv = j["levels"] = nlohmann::json::array();
    for (const auto& l : levels)
        lv.push_back({{"nx", l.nx}, {"ny", l.ny}, {"hx", l.hx}, {"hy", l.hy}, {"min", l.min}, {"max", l.max},
                      {"slack", l.slack}, {"lower_ok", l.lower_ok}, {"upper_ok", l.upper_ok},
                      {"m_matrix_violations", l.m_matrix_violations}});
    return j;
}

AuxiliarySolve solve_zeta(const HestonParams& params, const Obstacle& psi, Point p0, double rho, double M,
                          const AuxOptions& options) {
    if (!(p0.y > 0.0 && p0.y < 1.0)) throw std::invalid_argument("solve_zeta: need 0 < y0 < 1");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("solve_zeta: need 0 < rho < 1");
    AuxiliarySolve aux;
    aux.kind = "zeta";
    aux.p0 = p0;
    aux.rho = rho;
    aux.radius = rho * p0.y;
    aux.scale = M;
    aux.boundary_value = 10.0 * M * p0.y * rho * rho;
    aux.lower_bound = M * p0.y * rho * rho;
    aux.upper_bound = 14.0 * M * p0.y * rho * rho;
    const auto l = linear_approx(psi, p0);
    return run_auxiliary(params, std::move(aux), [&](Point p) { return -apply_L(params, l.jet(p), p); }, options);
}

AuxiliarySolve solve_xi(const HestonParams& params, const Obstacle& psi, Point p0, double rho, double N,
                        const AuxOptions& options) {
    if (!(p0.y >= 0.0 && p0.y < params.theta() / 4.0)) throw std::invalid_argument("solve_xi: need 0 <= y0 < theta/4");
    if (!(rho > 0.0)) throw std::invalid_argument("solve_xi: need rho > 0");
    AuxiliarySolve aux;
    aux.kind = "xi";
    aux.p0 = p0;
    aux.rho = rho;
    aux.radius = rho;
    aux.scale = N;
    aux.boundary_value = 10.0 * N * rho;
    aux.lower_bound = N * rho;
    aux.upper_bound = 20.0 * N * rho;
    return run_auxiliary(params, std::move(aux), [&](Point p) { return -apply_L(params, psi.jet(p), p); }, options);
}

std::string to_string(Regime regime) { return regime == Regime::interior ? "interior" : "boundary"; }

double loglog_slope(std::span<const double> radii, std::span<const double> values) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < radii.size() && k < values.size(); ++k) {
        if (!(values[k] > 0.0) || !(radii[k] > 0.0)) continue;
        const double x = std::log(radii[k]), y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return kNaN;
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

nlohmann::json GrowthReport::to_json() const {
    nlohmann::json j;
    j["anchor"] = {anchor.x, anchor.y};
    j["regime"] = to_string(regime);
    j["radii"] = radii;
    j["sup_gap"] = sup_gap;
    j["sup_level"] = sup_level;
    j["normalizer"] = normalizer;
    j["ratio"] = ratio;
    j["nodes"] = nodes;
    j["slope"] = finite_or_null(slope);
    j["max_ratio"] = max_ratio;
    j["degenerate"] = degenerate;
    j["tail_nonincreasing"] = tail_nonincreasing;
    nlohmann::json anchors = nlohmann::json::array();
    for (const auto& p : local_anchors) anchors.push_back({p.x, p.y});
    j["local_anchors"] = anchors;
    j["spacing"] = spacing;
    return j;
}

namespace {

void check_radii(std::span<const double> radii, Regime regime, Point anchor) {
    if (radii.size() < 3) throw std::invalid_argument("growth_profile: need at least three radii");
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (!(radii[k] < radii[k - 1])) throw std::invalid_argument("growth_profile: radii must decrease strictly");
    if (regime == Regime::interior && !(anchor.y > 0.0))
        throw std::invalid_argument("growth_profile: interior regime needs y0 > 0");
}

DomainWindow probe_window(Point anchor, Regime regime, double rho) {
    return regime == Regime::interior ? DomainWindow::ball(anchor, 0.5 * rho * anchor.y)
                                      : DomainWindow::half_ball(anchor, 0.5 * rho);
}

// Appends one radius to the report; psi0 is psi at the anchor.
void probe(GrowthReport& rep, const GridFunction& u, const GridFunction& psi, Point anchor, double psi0, double rho,
           double psi_c11) {
    const Grid& g = u.grid();
    const auto window = probe_window(anchor, rep.regime, rho);
    if (window.x_lo() < g.x_min() || window.x_hi() > g.x_max() || window.y_hi() > g.y_max() ||
        window.y_lo() < g.y_min())
        throw std::invalid_argument("growth_profile: probe " + window.describe() + " leaves the mesh");
    const auto nodes = window.covering_nodes(g);
    double gap = -INFINITY, level = -INFINITY;
    for (std::size_t k : nodes) {
        gap = std::max(gap, u[k] - psi[k]);
        level = std::max(level, u[k] - psi0);
    }
    const double norm = rep.regime == Regime::interior ? anchor.y * rho * rho * psi_c11 : rho * psi_c11;
    rep.radii.push_back(rho);
    rep.sup_gap.push_back(gap);
    rep.sup_level.push_back(rep.regime == Regime::boundary ? level : kNaN);
    rep.normalizer.push_back(norm);
    rep.ratio.push_back((rep.regime == Regime::interior ? gap : level) / norm);
    rep.nodes.push_back(nodes.size());
    rep.local_anchors.push_back(anchor);
    rep.spacing.push_back(g.hx());
}

void finish(GrowthReport& rep, double scale) {
    rep.degenerate = std::all_of(rep.sup_gap.begin(), rep.sup_gap.end(),
                                 [&](double s) { return s <= 1e-12 * std::max(1.0, scale); });
    rep.slope = rep.degenerate ? kNaN : loglog_slope(rep.radii, rep.sup_gap);
    rep.max_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());
    const std::size_t n = rep.ratio.size();
    rep.tail_nonincreasing = rep.ratio[n - 2] <= rep.ratio[n - 3] && rep.ratio[n - 1] <= rep.ratio[n - 2];
}

double sup_abs(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace

GrowthReport growth_profile(const GridFunction& u, const GridFunction& psi, Point anchor, Regime regime,
                            std::span<const double> radii, double psi_c11) {
    check_radii(radii, regime, anchor);
    GrowthReport rep;
    rep.anchor = anchor;
    rep.regime = regime;
    const double psi0 = psi.interpolate(anchor);
    for (double rho : radii) probe(rep, u, psi, anchor, psi0, rho, psi_c11);
    finish(rep, sup_abs(psi));
    return rep;
}

Point nearest_contour_crossing(const RegionMap& regions, Point target) {
    const double h = target.y;
    Point best{kNaN, kNaN};
    double best_d = INFINITY;
    auto consider = [&](Point p) {
        const double d = std::hypot(p.x - target.x, p.y - target.y);
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    };
    for (const auto& c : regions.free_boundary)
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k].y == h) consider(c[k]);
            if (k + 1 == c.size()) continue;
            const Point a = c[k], b = c[k + 1];
            if (a.y == b.y || (a.y - h) * (b.y - h) > 0.0) continue;
            const double t = (h - a.y) / (b.y - a.y);
            consider({a.x + t * (b.x - a.x), h});
        }
    return best;
}

GrowthReport zoom_growth_profile(const HestonParams& params, const Obstacle& psi, const GridFunction& coarse_u,
                                 Point anchor, Regime regime, std::span<const double> radii, double psi_c11,
                                 const ZoomOptions& options) {
    check_radii(radii, regime, anchor);
    if (!(options.patch_factor > 1.0)) throw std::invalid_argument("zoom_growth_profile: patch_factor must exceed 1");
    GrowthReport rep;
    rep.anchor = anchor;
    rep.regime = regime;
    GridFunction data = coarse_u;
    Point centre = anchor;
    double scale = 0.0;
    const Grid& cg = coarse_u.grid();
    auto ball_of = [&](double rho) { return regime == Regime::interior ? 0.5 * rho * anchor.y : 0.5 * rho; };
    // Lead-in levels halve the patch from about lead_in coarse cells down to
    // the first probe, so each solve starts close to its own free boundary.
    std::vector<double> halves;
    const double first = options.patch_factor * ball_of(radii.front());
    for (double h = first; 2.0 * h <= options.lead_in * cg.hx(); ) halves.insert(halves.begin(), h *= 2.0);
    const std::size_t lead = halves.size();
    for (double rho : radii) halves.push_back(options.patch_factor * ball_of(rho));
    for (std::size_t level = 0; level < halves.size(); ++level) {
        const bool probing = level >= lead;
        const double half = halves[level];
        const double b = half / options.patch_factor;
        double y_lo = regime == Regime::interior ? centre.y - half : 0.0;
        if (!probing) y_lo = std::max(y_lo, 0.0);
        if (!(y_lo >= 0.0)) throw std::invalid_argument("zoom_growth_profile: interior patch reaches y < 0");
        // Re-solve around the local free boundary until the probe ball sits
        // well inside the patch.
        std::optional<LocalSolve> local;
        for (int attempt = 0;; ++attempt) {
            const double x_lo = std::max(centre.x - half, cg.x_min()), x_hi = std::min(centre.x + half, cg.x_max());
            const double y_hi = std::min(centre.y + half, cg.y_max());
            local = local_obstacle_solve(params, psi, data, x_lo, x_hi, y_lo, y_hi, options.nx, options.scheme,
                                         options.lcp);
            const Point next = nearest_contour_crossing(local->regions, {centre.x, anchor.y});
            if (!std::isfinite(next.x))
                throw std::runtime_error("zoom_growth_profile: no free boundary at height " +
                                         std::to_string(anchor.y) + " near x = " + std::to_string(centre.x));
            const double shift = std::abs(next.x - centre.x);
            centre = next;
            if (!probing || shift <= 0.25 * (options.patch_factor - 1.0) * b) break;
            if (attempt == 4)
                throw std::runtime_error("zoom_growth_profile: free boundary keeps moving at radius " +
                                         std::to_string(radii[level - lead]));
        }
        if (!probing) {
            data = std::move(local->solution.u);
            continue;
        }
        const double rho = radii[level - lead];
        probe(rep, local->solution.u, local->psi, centre, psi.value(centre), rho, psi_c11);
        scale = std::max(scale, sup_abs(local->psi));
        data = std::move(local->solution.u);
    }
    finish(rep, scale);
    return rep;
}

std::vector<Point> anchors_on_free_boundary(const RegionMap& regions, std::span<const double> heights) {
    std::vector<const std::vector<Point>*> curves;
    for (const auto& c : regions.free_boundary) curves.push_back(&c);
    std::stable_sort(curves.begin(), curves.end(), [](auto* a, auto* b) { return a->size() > b->size(); });
    std::vector<Point> out;
    for (double h : heights) {
        bool found = false;
        if (h <= 0.0) {
            Point best{0.0, INFINITY};
            for (const auto* c : curves)
                for (const Point& p : *c)
                    if (p.y < best.y) best = p;
            if (std::isfinite(best.y)) {
                out.push_back(best);
                found = true;
            }
            continue;
        }
        for (const auto* c : curves) {
            for (std::size_t k = 0; k + 1 < c->size() && !found; ++k) {
                const Point a = (*c)[k], b = (*c)[k + 1];
                if ((a.y - h) * (b.y - h) > 0.0 || a.y == b.y) continue;
                const double t = (h - a.y) / (b.y - a.y);
                out.push_back({a.x + t * (b.x - a.x), h});
                found = true;
            }
            if (found) break;
        }
    }
    return out;
}

LocalSolve local_obstacle_solve(const HestonParams& params, const Obstacle& psi, const GridFunction& coarse_u,
                                double x_lo, double x_hi, double y_lo, double y_hi, std::size_t nx,
                                const SchemeOptions& scheme, const LcpOptions& lcp) {
    const double hx = (x_hi - x_lo) / static_cast<double>(nx - 1);
    // Near the top of the monotone band of the cross stencil, capped at hx.
    const double s = std::abs(params.sigma()), c = std::abs(params.rho_corr());
    const double hy = std::max(s * hx, std::min(hx, c > 0.0 ? 0.9 * s * hx / c : hx));
    const auto ny = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil((y_hi - y_lo) / hy)) + 1);
    auto grid = std::make_shared<const Grid>(Grid::patch(x_lo, x_hi, y_lo, y_hi, nx, ny));
    auto psi_v = sample(psi, grid);
    // Interpolated boundary data, lifted to the obstacle where bilinear
    // interpolation of the contact set dips below it.
    auto g = GridFunction::sample(grid, [&](Point p) { return std::max(coarse_u.interpolate(p), psi.value(p)); });
    GridFunction f(grid, 0.0);
    auto system = build_system(params, grid, g, f, scheme);
    LcpOptions warm = lcp;
    if (warm.initial_guess.empty()) warm.initial_guess.assign(g.values().begin(), g.values().end());
    double scale = 1.0;
    for (double v : psi_v.values()) scale = std::max(scale, std::abs(v));
    auto sol = solve_obstacle(system, psi_v, warm, kLocalContact * scale);
    auto regions = classify_regions(sol, psi_v, sol.tol_region);
    return {std::move(system), std::move(psi_v), std::move(sol), std::move(regions)};
}

HarmonicSplit harmonic_split(const GridFunction& w, const DiscreteSystem& system, double tol) {
    if (w.size() != system.size()) throw std::invalid_argument("harmonic_split: w must live on the system grid");
    std::vector<double> b(system.size(), 0.0);
    HarmonicSplit out;
    out.hypothesis_ok = true;
    for (std::size_t k = 0; k < b.size(); ++k)
        if (system.is_dirichlet(k)) {
            b[k] = w[k];
            if (w[k] < -tol) out.hypothesis_ok = false;
        }
    out.w1 = GridFunction(system.grid, solve_linear(system.matrix, b, kDefaultTol));
    std::vector<double> w2(w.size());
    out.lower_ok = true;
    out.upper_ok = true;
    for (std::size_t k = 0; k < w.size(); ++k) {
        w2[k] = w[k] - out.w1[k];
        if (out.w1[k] < -tol) out.lower_ok = false;
        if (out.w1[k] > w[k] + tol) out.upper_ok = false;
        if (system.is_dirichlet(k)) out.w2_boundary_max = std::max(out.w2_boundary_max, std::abs(w2[k]));
    }
    out.w2 = GridFunction(system.grid, std::move(w2));
    return out;
}

HarnackResult harnack_quotient(const GridFunction& v, const DomainWindow& window, double tol) {
    const auto nodes = window.scaled(0.5).nodes(v.grid());
    if (nodes.size() < 2) throw std::invalid_argument("harnack_quotient: half window " + window.describe() + " too small");
    HarnackResult out;
    out.sup = -INFINITY;
    out.inf = INFINITY;
    for (std::size_t k : nodes) {
        out.sup = std::max(out.sup, v[k]);
        out.inf = std::min(out.inf, v[k]);
    }
    out.nodes = nodes.size();
    if (out.inf < tol) {
        out.floored = true;
        out.inf = tol;
    }
    out.ratio = out.sup / out.inf;
    return out;
}

CertificateLevel certificate_level(const GridFunction& u, const GridFunction& psi, const GridFunction& f,
                                   const DomainWindow& inner, const DomainWindow& outer, double alpha,
                                   double axis_band) {
    const Grid& g = u.grid();
    CertificateLevel lv;
    lv.nx = g.nx();
    lv.ny = g.ny();
    lv.u_c11s_inner = c11s_norm(u, inner).value;
    for (std::size_t k : outer.nodes(g)) lv.u_sup_outer = std::max(lv.u_sup_outer, std::abs(u[k]));
    const auto fr = calpha_s_norm(f, outer, alpha);
    lv.f_calpha_outer = fr.value;
    lv.subsampled = fr.subsampled;
    lv.psi_c11_outer = c11_norm(psi, outer).value;
    lv.ratio = lv.u_c11s_inner / (lv.u_sup_outer + lv.f_calpha_outer + lv.psi_c11_outer);
    const auto d = derivatives(u);
    for (std::size_t k : inner.nodes(g)) {
        if (g.node(k).y > axis_band) continue;
        lv.d2_sup_near_axis = std::max(
            lv.d2_sup_near_axis, std::sqrt(d.uxx[k] * d.uxx[k] + 2 * d.uxy[k] * d.uxy[k] + d.uyy[k] * d.uyy[k]));
    }
    return lv;
}

nlohmann::json CertificateReport::to_json() const {
    nlohmann::json j;
    auto& arr = j["levels"] = nlohmann::json::array();
    for (const auto& l : levels)
        arr.push_back({{"nx", l.nx}, {"ny", l.ny}, {"u_c11s_inner", l.u_c11s_inner}, {"u_sup_outer", l.u_sup_outer},
                       {"f_calpha_outer", l.f_calpha_outer}, {"psi_c11_outer", l.psi_c11_outer}, {"ratio", l.ratio},
                       {"d2_sup_near_axis", l.d2_sup_near_axis}, {"subsampled", l.subsampled}});
    j["median"] = median;
    j["max"] = max;
    j["bounded"] = bounded;
    j["bound_factor"] = 1.5;
    return j;
}

CertificateReport c11s_certificate(std::vector<CertificateLevel> levels) {
    if (levels.size() < 3) throw std::invalid_argument("c11s_certificate: need at least three refinement levels");
    CertificateReport rep;
    std::vector<double> ratios;
    for (const auto& l : levels) ratios.push_back(l.ratio);
    rep.levels = std::move(levels);
    rep.median = median(ratios);
    rep.max = *std::max_element(ratios.begin(), ratios.end());
    rep.bounded = rep.max <= 1.5 * rep.median;
    return rep;
}

StrongMaxProbe strong_max_probe(const DiscreteSystem& system, const GridFunction& v, double tol) {
    StrongMaxProbe out;
    out.max_value = -INFINITY;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k] > out.max_value) {
            out.max_value = v[k];
            out.argmax = k;
        }
    std::size_t seed = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k < v.size(); ++k)
        if (!system.is_dirichlet(k) && v[k] >= out.max_value - tol) {
            seed = k;
            break;
        }
    if (seed == static_cast<std::size_t>(-1)) return out;
    out.attained_at_equation_node = true;
    const auto& m = system.matrix;
    std::vector<char> seen(v.size(), 0);
    std::deque<std::size_t> queue{seed};
    seen[seed] = 1;
    double lo = v[seed], hi = v[seed];
    while (!queue.empty()) {
        const std::size_t r = queue.front();
        queue.pop_front();
        ++out.component_size;
        lo = std::min(lo, v[r]);
        hi = std::max(hi, v[r]);
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            const std::size_t c = m.cols[k];
            if (!seen[c] && !system.is_dirichlet(c)) {
                seen[c] = 1;
                queue.push_back(c);
            }
        }
    }
    out.spread = hi - lo;
    out.constant = out.spread <= tol;
    return out;
}

}  // namespace hestonlab
