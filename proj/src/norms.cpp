#include "hestonlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hestonlab {

DomainWindow DomainWindow::rectangle(double x_lo, double x_hi, double y_lo, double y_hi) {
    y_lo = std::max(y_lo, 0.0);
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw std::invalid_argument("DomainWindow: empty rectangle");
    DomainWindow w;
    w.shape_ = Shape::rectangle;
    w.x_lo_ = x_lo;
    w.x_hi_ = x_hi;
    w.y_lo_ = y_lo;
    w.y_hi_ = y_hi;
    w.center_ = {0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)};
    return w;
}

DomainWindow DomainWindow::ball(Point center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("DomainWindow: radius must be > 0");
    if (!(center.y + radius > 0.0)) throw std::invalid_argument("DomainWindow: ball misses the half-plane");
    DomainWindow w;
    w.shape_ = Shape::ball;
    w.center_ = center;
    w.radius_ = radius;
    w.x_lo_ = center.x - radius;
    w.x_hi_ = center.x + radius;
    w.y_lo_ = std::max(0.0, center.y - radius);
    w.y_hi_ = center.y + radius;
    return w;
}

DomainWindow DomainWindow::half_ball(Point center, double radius) {
    DomainWindow w = ball(center, radius);
    w.shape_ = Shape::half_ball;
    return w;
}

bool DomainWindow::contains(Point p) const {
    if (p.y < 0.0) return false;
    if (shape_ == Shape::rectangle) return p.x >= x_lo_ && p.x <= x_hi_ && p.y >= y_lo_ && p.y <= y_hi_;
    const double dx = p.x - center_.x, dy = p.y - center_.y;
    return dx * dx + dy * dy <= radius_ * radius_ * (1.0 + 1e-12);
}

bool DomainWindow::meets_box(double bx_lo, double bx_hi, double by_lo, double by_hi) const {
    if (by_hi < 0.0) return false;
    if (shape_ == Shape::rectangle)
        return bx_hi >= x_lo_ && bx_lo <= x_hi_ && by_hi >= y_lo_ && by_lo <= y_hi_;
    const double px = std::clamp(center_.x, bx_lo, bx_hi);
    const double py = std::clamp(center_.y, std::max(by_lo, 0.0), by_hi);
    return contains({px, py});
}

DomainWindow DomainWindow::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("DomainWindow::scaled: factor must be > 0");
    if (shape_ == Shape::rectangle) {
        const double hx = 0.5 * (x_hi_ - x_lo_) * factor, hy = 0.5 * (y_hi_ - y_lo_) * factor;
        return rectangle(center_.x - hx, center_.x + hx, center_.y - hy, center_.y + hy);
    }
    DomainWindow w = ball(center_, radius_ * factor);
    w.shape_ = shape_;
    return w;
}

std::vector<std::size_t> DomainWindow::nodes(const Grid& grid) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        if (grid.y(j) < y_lo_ - 1e-14 || grid.y(j) > y_hi_ + 1e-14) continue;
        for (std::size_t i = 0; i < grid.nx(); ++i)
            if (contains({grid.x(i), grid.y(j)})) out.push_back(grid.index(i, j));
    }
    return out;
}

std::vector<std::size_t> DomainWindow::covering_nodes(const Grid& grid) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i)
            if (meets_box(grid.cell_x_lo(i), grid.cell_x_hi(i), grid.cell_y_lo(j), grid.cell_y_hi(j)))
                out.push_back(grid.index(i, j));
    return out;
}

std::string to_string(DomainWindow::Shape shape) {
    switch (shape) {
        case DomainWindow::Shape::rectangle: return "rectangle";
        case DomainWindow::Shape::ball: return "ball";
        case DomainWindow::Shape::half_ball: return "half_ball";
    }
    return "?";
}

std::string DomainWindow::describe() const {
    std::ostringstream os;
    if (shape_ == Shape::rectangle)
        os << "rectangle[" << x_lo_ << "," << x_hi_ << "]x[" << y_lo_ << "," << y_hi_ << "]";
    else
        os << to_string(shape_) << "((" << center_.x << "," << center_.y << ")," << radius_ << ")";
    return os.str();
}

nlohmann::json DomainWindow::to_json() const {
    nlohmann::json j;
    j["shape"] = to_string(shape_);
    if (shape_ == Shape::rectangle) {
        j["x"] = {x_lo_, x_hi_};
        j["y"] = {y_lo_, y_hi_};
    } else {
        j["center"] = {center_.x, center_.y};
        j["radius"] = radius_;
    }
    return j;
}

double cycloidal_distance(Point z1, Point z2) {
    if (z1.y < 0.0 || z2.y < 0.0) throw std::invalid_argument("cycloidal_distance: negative height");
    const double num = std::abs(z1.x - z2.x) + std::abs(z1.y - z2.y);
    if (num == 0.0) return 0.0;
    return num / (std::sqrt(z1.y) + std::sqrt(z2.y) + std::sqrt(num));
}

namespace {

// Three-point derivative weights at the middle node, spacings hm (left) and hp (right).
struct Weights3 {
    double m, c, p;
};
Weights3 first_central(double hm, double hp) {
    return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}
Weights3 second_central(double hm, double hp) {
    return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}
// One-sided at the first of three nodes spaced h1, h2.
Weights3 first_forward(double h1, double h2) {
    return {-(2 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))};
}

// Derivatives of a 1-D line of values v[0..n) at coordinates t[0..n).
void line_derivatives(std::span<const double> t, const double* v, std::size_t stride, std::size_t n,
                      bool first_order_start, double* d1, double* d2, std::size_t out_stride) {
    for (std::size_t k = 0; k < n; ++k) {
        auto at = [&](std::size_t m) { return v[m * stride]; };
        double a, b;
        if (k == 0) {
            const double h1 = t[1] - t[0], h2 = t[2] - t[1];
            const auto w = first_forward(h1, h2);
            a = first_order_start ? (at(1) - at(0)) / h1 : w.m * at(0) + w.c * at(1) + w.p * at(2);
            const auto s = second_central(h1, h2);
            b = s.m * at(0) + s.c * at(1) + s.p * at(2);
        } else if (k + 1 == n) {
            const double h1 = t[n - 1] - t[n - 2], h2 = t[n - 2] - t[n - 3];
            const auto w = first_forward(h1, h2);
            a = -(w.m * at(n - 1) + w.c * at(n - 2) + w.p * at(n - 3));
            const auto s = second_central(h2, h1);
            b = s.m * at(n - 3) + s.c * at(n - 2) + s.p * at(n - 1);
        } else {
            const double hm = t[k] - t[k - 1], hp = t[k + 1] - t[k];
            const auto w = first_central(hm, hp);
            const auto s = second_central(hm, hp);
            a = w.m * at(k - 1) + w.c * at(k) + w.p * at(k + 1);
            b = s.m * at(k - 1) + s.c * at(k) + s.p * at(k + 1);
        }
        d1[k * out_stride] = a;
        if (d2) d2[k * out_stride] = b;
    }
}

double frob(const DerivativeFields& d, std::size_t k) {
    return std::sqrt(d.uxx[k] * d.uxx[k] + 2.0 * d.uxy[k] * d.uxy[k] + d.uyy[k] * d.uyy[k]);
}

double grad(const DerivativeFields& d, std::size_t k) { return std::hypot(d.ux[k], d.uy[k]); }

std::vector<std::size_t> require_nodes(const Grid& g, const DomainWindow& w) {
    auto nodes = w.nodes(g);
    if (nodes.empty()) throw std::invalid_argument("window " + w.describe() + " contains no grid node");
    return nodes;
}

double magnitude(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

DerivativeFields derivatives(const GridFunction& u) {
    const Grid& g = u.grid();
    const std::size_t nx = g.nx(), ny = g.ny(), n = g.size();
    DerivativeFields d;
    d.ux.assign(n, 0.0);
    d.uy.assign(n, 0.0);
    d.uxx.assign(n, 0.0);
    d.uxy.assign(n, 0.0);
    d.uyy.assign(n, 0.0);
    d.interior.assign(n, 0);
    const double* v = u.values().data();
    const bool axis = g.touches_axis();
    for (std::size_t j = 0; j < ny; ++j)
        line_derivatives(g.xs(), v + j * nx, 1, nx, false, d.ux.data() + j * nx, d.uxx.data() + j * nx, 1);
    for (std::size_t i = 0; i < nx; ++i) {
        line_derivatives(g.ys(), v + i, nx, ny, axis, d.uy.data() + i, d.uyy.data() + i, nx);
        line_derivatives(g.ys(), d.ux.data() + i, nx, ny, axis, d.uxy.data() + i, nullptr, nx);
    }
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 1; i + 1 < nx; ++i)
            d.interior[g.index(i, j)] = (j + 1 < ny) && (j > 0 || axis);
    return d;
}

HolderResult holder_s_seminorm(const GridFunction& f, const DomainWindow& window, double alpha,
                               std::size_t pair_budget, kernels::Exec exec) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_s_seminorm: alpha must lie in (0, 1)");
    const Grid& g = f.grid();
    const auto nodes = window.nodes(g);
    if (nodes.size() < 2) throw std::invalid_argument("holder_s_seminorm: window holds fewer than two nodes");
    const std::size_t n = nodes.size();
    const std::size_t total = n * (n - 1) / 2;

    kernels::PointSamples s;
    auto push = [&](std::size_t k) {
        const Point p = g.node(k);
        s.x.push_back(p.x);
        s.y.push_back(p.y);
        s.v.push_back(f[k]);
    };

    HolderResult out;
    if (total <= pair_budget) {
        for (std::size_t k : nodes) push(k);
        out.value = kernels::holder_all_pairs(s, alpha, exec);
        out.pairs = total;
        return out;
    }

    // Strided subset with all its pairs, using about half the budget.
    const auto m = static_cast<std::size_t>(std::sqrt(static_cast<double>(pair_budget)));
    const std::size_t stride = (n + m - 1) / m;
    for (std::size_t k = 0; k < n; k += stride) push(nodes[k]);
    out.value = kernels::holder_all_pairs(s, alpha, exec);
    out.pairs = s.size() * (s.size() - 1) / 2;

    // Short-range pairs among all window nodes.
    s = {};
    std::vector<std::size_t> slot(g.size(), static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < n; ++k) {
        slot[nodes[k]] = k;
        push(nodes[k]);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    const int offsets[][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}, {2, -1}, {1, -2}, {2, 2}, {2, -2}};
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<long>(g.col(nodes[k])), j = static_cast<long>(g.row(nodes[k]));
        for (const auto& o : offsets) {
            const long ii = i + o[0], jj = j + o[1];
            if (ii < 0 || jj < 0 || ii >= static_cast<long>(g.nx()) || jj >= static_cast<long>(g.ny())) continue;
            const std::size_t other = slot[g.index(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj))];
            if (other != static_cast<std::size_t>(-1)) pairs.emplace_back(k, other);
        }
    }
    out.value = std::max(out.value, kernels::holder_pair_list(s, pairs, alpha, exec));
    out.pairs += pairs.size();
    out.subsampled = true;
    return out;
}

nlohmann::json NormReport::to_json() const {
    nlohmann::json j;
    j["norm_name"] = name;
    j["window"] = window;
    j["value"] = value;
    j["parts"] = parts;
    j["subsampled"] = subsampled;
    j["slack"] = slack;
    return j;
}

NormReport c11s_norm(const GridFunction& u, const DomainWindow& window) {
    const Grid& g = u.grid();
    const auto nodes = require_nodes(g, window);
    const auto d = derivatives(u);
    double yd2 = 0.0, gr = 0.0, sup = 0.0;
    for (std::size_t k : nodes) {
        if (!d.interior[k])
            throw std::invalid_argument("c11s_norm: window " + window.describe() +
                                        " reaches a mesh edge; shrink it by one node");
        yd2 = std::max(yd2, g.node(k).y * frob(d, k));
        gr = std::max(gr, grad(d, k));
        sup = std::max(sup, std::abs(u[k]));
    }
    NormReport r;
    r.name = "c11s";
    r.window = window.to_json();
    r.parts = {{"yD2_sup", yd2}, {"grad_sup", gr}, {"sup", sup}};
    r.value = yd2 + gr + sup;
    r.slack = 64.0 * std::numeric_limits<double>::epsilon() * r.value;
    return r;
}

namespace {

NormReport calpha_fields(const GridFunction& u, const DomainWindow& window, double alpha,
                         std::size_t pair_budget, bool with_derivatives) {
    const Grid& g = u.grid();
    const auto nodes = require_nodes(g, window);
    std::vector<std::pair<std::string, std::vector<double>>> fields;
    fields.emplace_back("u", std::vector<double>(u.values().begin(), u.values().end()));
    if (with_derivatives) {
        auto d = derivatives(u);
        for (std::size_t k : nodes)
            if (!d.interior[k])
                throw std::invalid_argument("c2alpha_s_norm: window " + window.describe() + " reaches a mesh edge");
        std::vector<double> yxx(g.size()), yxy(g.size()), yyy(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double y = g.node(k).y;
            yxx[k] = y * d.uxx[k];
            yxy[k] = y * d.uxy[k];
            yyy[k] = y * d.uyy[k];
        }
        fields.emplace_back("ux", std::move(d.ux));
        fields.emplace_back("uy", std::move(d.uy));
        fields.emplace_back("y_uxx", std::move(yxx));
        fields.emplace_back("y_uxy", std::move(yxy));
        fields.emplace_back("y_uyy", std::move(yyy));
    }
    NormReport r;
    r.name = with_derivatives ? "c2alpha_s" : "calpha_s";
    r.window = window.to_json();
    r.parts["alpha"] = alpha;
    for (auto& [name, values] : fields) {
        double sup = 0.0;
        for (std::size_t k : nodes) sup = std::max(sup, std::abs(values[k]));
        GridFunction field(u.grid_ptr(), std::move(values));
        const auto h = holder_s_seminorm(field, window, alpha, pair_budget);
        r.parts[name + "_sup"] = sup;
        r.parts[name + "_holder"] = h.value;
        r.value += sup + h.value;
        r.subsampled = r.subsampled || h.subsampled;
    }
    r.slack = 64.0 * std::numeric_limits<double>::epsilon() * r.value;
    return r;
}

}  // namespace

NormReport c2alpha_s_norm(const GridFunction& u, const DomainWindow& window, double alpha, std::size_t pair_budget) {
    return calpha_fields(u, window, alpha, pair_budget, true);
}

NormReport calpha_s_norm(const GridFunction& u, const DomainWindow& window, double alpha, std::size_t pair_budget) {
    return calpha_fields(u, window, alpha, pair_budget, false);
}

NormReport h2_weighted_norm(const GridFunction& u, const HestonParams& params, const DomainWindow& window) {
    const Grid& g = u.grid();
    const auto d = derivatives(u);
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t j = 0; j + 1 < g.ny(); ++j) {
        const double yc = 0.5 * (g.y(j) + g.y(j + 1));
        const double hy = g.y(j + 1) - g.y(j);
        for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
            const double xc = 0.5 * (g.x(i) + g.x(i + 1));
            if (!window.contains({xc, yc})) continue;
            const double w = weight(params, {xc, yc});
            if (!std::isfinite(w))
                throw std::domain_error("h2_weighted_norm: non-finite weight in cell (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
            const std::size_t k[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)};
            auto avg = [&](const std::vector<double>& f) { return 0.25 * (f[k[0]] + f[k[1]] + f[k[2]] + f[k[3]]); };
            const double uc = 0.25 * (u[k[0]] + u[k[1]] + u[k[2]] + u[k[3]]);
            const double ux = avg(d.ux), uy = avg(d.uy);
            const double uxx = avg(d.uxx), uxy = avg(d.uxy), uyy = avg(d.uyy);
            const double d2 = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
            const double integrand = yc * yc * d2 + (1 + yc) * (1 + yc) * (ux * ux + uy * uy) + (1 + yc) * uc * uc;
            sum += integrand * w * (g.x(i + 1) - g.x(i)) * hy;
            ++cells;
        }
    }
    if (cells == 0) throw std::invalid_argument("h2_weighted_norm: no cell centre inside " + window.describe());
    NormReport r;
    r.name = "h2_weighted";
    r.window = window.to_json();
    r.value = std::sqrt(sum);
    r.parts = {{"cells", static_cast<double>(cells)}, {"gamma", params.gamma_weight()}};
    r.slack = 64.0 * std::numeric_limits<double>::epsilon() * r.value;
    return r;
}

NormReport c11_norm(const GridFunction& u, const DomainWindow& window) {
    const auto nodes = require_nodes(u.grid(), window);
    const auto d = derivatives(u);
    double sup = 0.0, gr = 0.0, d2 = 0.0;
    for (std::size_t k : nodes) {
        sup = std::max(sup, std::abs(u[k]));
        gr = std::max(gr, grad(d, k));
        d2 = std::max(d2, frob(d, k));
    }
    NormReport r;
    r.name = "c11";
    r.window = window.to_json();
    r.parts = {{"sup", sup}, {"grad_sup", gr}, {"D2_sup", d2}};
    r.value = sup + gr + d2;
    r.slack = 64.0 * std::numeric_limits<double>::epsilon() * magnitude(u.values());
    return r;
}

double c11_norm(const Obstacle& psi, const DomainWindow& window, std::size_t n) {
    if (n < 2) throw std::invalid_argument("c11_norm: need n >= 2");
    double sup = 0.0, gr = 0.0, d2 = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double x = window.x_lo() + (window.x_hi() - window.x_lo()) * static_cast<double>(a) / static_cast<double>(n - 1);
            const double y = window.y_lo() + (window.y_hi() - window.y_lo()) * static_cast<double>(b) / static_cast<double>(n - 1);
            if (!window.contains({x, y})) continue;
            const Jet2 j = psi.jet({x, y});
            sup = std::max(sup, std::abs(j.u));
            gr = std::max(gr, std::hypot(j.ux, j.uy));
            d2 = std::max(d2, std::sqrt(j.uxx * j.uxx + 2 * j.uxy * j.uxy + j.uyy * j.uyy));
        }
    return sup + gr + d2;
}

}  // namespace hestonlab
