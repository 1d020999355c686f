#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hestonlab/norms.hpp"

using namespace hestonlab;

namespace {

GridPtr unit_grid(std::size_t n) { return std::make_shared<const Grid>(0.0, 1.0, 1.0, n, n); }

GridPtr patch(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny) {
    return std::make_shared<const Grid>(Grid::patch(x0, x1, y0, y1, nx, ny));
}

double brute_holder(const GridFunction& f, const DomainWindow& w, double alpha) {
    const auto nodes = w.nodes(f.grid());
    double best = 0.0;
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const double s = cycloidal_distance(f.grid().node(nodes[a]), f.grid().node(nodes[b]));
            best = std::max(best, std::abs(f[nodes[a]] - f[nodes[b]]) / std::pow(s, alpha));
        }
    return best;
}

}  // namespace

TEST(Cycloidal, Examples) {
    EXPECT_EQ(cycloidal_distance({0.3, 0.2}, {0.3, 0.2}), 0.0);
    EXPECT_DOUBLE_EQ(cycloidal_distance({0, 0}, {0, 1}), 0.5);
    EXPECT_DOUBLE_EQ(cycloidal_distance({1, 0}, {0, 0}), 1.0);
    EXPECT_THROW(cycloidal_distance({0, -1}, {0, 0}), std::invalid_argument);
}

TEST(Cycloidal, SymmetryAndEquivalenceBand) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double c = INFINITY;
    for (int k = 0; k < 5000; ++k) {
        const Point a{2 * u(rng) - 1, u(rng)}, b{2 * u(rng) - 1, u(rng)};
        const double s = cycloidal_distance(a, b);
        EXPECT_EQ(s, cycloidal_distance(b, a));
        EXPECT_GT(s, 0.0);
        const double e = std::hypot(a.x - b.x, a.y - b.y);
        EXPECT_LE(s, std::sqrt(e) * (1 + 1e-15));
        c = std::min(c, s / e);
    }
    EXPECT_GT(c, 0.0);
}

TEST(Holder, ConstantFieldIsZero) {
    const auto g = unit_grid(11);
    const GridFunction f(g, 3.0);
    EXPECT_EQ(holder_s_seminorm(f, DomainWindow::rectangle(0, 1, 0, 1), 0.5).value, 0.0);
}

TEST(Holder, DistanceFieldAttainsOne) {
    const auto g = unit_grid(21);
    const Point z0 = g->node(g->index(7, 4));
    for (double alpha : {0.3, 0.5, 0.8}) {
        const auto f = GridFunction::sample(g, [&](Point p) { return std::pow(cycloidal_distance(p, z0), alpha); });
        const auto r = holder_s_seminorm(f, DomainWindow::rectangle(0, 1, 0, 1), alpha);
        EXPECT_FALSE(r.subsampled);
        EXPECT_GE(r.value, 1.0 - 1e-12);
        EXPECT_NEAR(r.value, brute_holder(f, DomainWindow::rectangle(0, 1, 0, 1), alpha), 1e-14);
    }
}

TEST(Holder, LinearFieldMatchesBruteForce) {
    for (std::size_t n : {5, 17, 30}) {
        const auto g = unit_grid(n);
        const auto f = GridFunction::sample(g, [](Point p) { return p.x; });
        const auto w = DomainWindow::rectangle(0, 1, 0, 1);
        EXPECT_DOUBLE_EQ(holder_s_seminorm(f, w, 0.5).value, brute_holder(f, w, 0.5));
        const auto ball = DomainWindow::half_ball({0.5, 0.0}, 0.4);
        EXPECT_DOUBLE_EQ(holder_s_seminorm(f, ball, 0.5).value, brute_holder(f, ball, 0.5));
    }
}

TEST(Holder, SubsampleIsLowerBound) {
    const auto g = unit_grid(30);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(g->size());
    for (auto& x : v) x = u(rng);
    const GridFunction f(g, v);
    const auto w = DomainWindow::rectangle(0, 1, 0, 1);
    const auto full = holder_s_seminorm(f, w, 0.5);
    const auto sub = holder_s_seminorm(f, w, 0.5, 5000);
    EXPECT_FALSE(full.subsampled);
    EXPECT_TRUE(sub.subsampled);
    EXPECT_LE(sub.value, full.value);
    EXPECT_GT(sub.value, 0.5 * full.value);
}

TEST(Holder, SerialAndParallelAgree) {
    const auto g = unit_grid(40);
    const auto f = GridFunction::sample(g, [](Point p) { return std::sin(7 * p.x) * std::cos(3 * p.y); });
    const auto w = DomainWindow::rectangle(0, 1, 0, 1);
    EXPECT_EQ(holder_s_seminorm(f, w, 0.5, kDefaultPairBudget, kernels::Exec::serial).value,
              holder_s_seminorm(f, w, 0.5, kDefaultPairBudget, kernels::Exec::parallel).value);
}

TEST(Holder, RejectsBadInput) {
    const auto g = unit_grid(5);
    const GridFunction f(g, 1.0);
    EXPECT_THROW(holder_s_seminorm(f, DomainWindow::rectangle(0, 1, 0, 1), 1.0), std::invalid_argument);
    EXPECT_THROW(holder_s_seminorm(f, DomainWindow::rectangle(0.01, 0.02, 0.01, 0.02), 0.5), std::invalid_argument);
}

TEST(C11s, ConstantAndQuadratics) {
    const auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 41, 21, 0.9);
    const auto w = DomainWindow::rectangle(-0.5, 0.5, 0.0, 0.8);
    const auto nodes = w.nodes(*g);
    double ymax = 0, xmax = 0;
    for (auto k : nodes) {
        ymax = std::max(ymax, g->node(k).y);
        xmax = std::max(xmax, std::abs(g->node(k).x));
    }
    EXPECT_NEAR(c11s_norm(GridFunction(g, -2.5), w).value, 2.5, 1e-11);

    const auto x2 = c11s_norm(GridFunction::sample(g, [](Point p) { return p.x * p.x; }), w);
    EXPECT_NEAR(x2.parts.at("yD2_sup"), 2 * ymax, 1e-10);
    EXPECT_NEAR(x2.parts.at("grad_sup"), 2 * xmax, 1e-10);
    EXPECT_NEAR(x2.parts.at("sup"), xmax * xmax, 1e-15);

    // the y = 0 row uses a forward first difference but y D2 vanishes there
    const auto y2 = c11s_norm(GridFunction::sample(g, [](Point p) { return p.y * p.y; }), w);
    EXPECT_NEAR(y2.parts.at("yD2_sup"), 2 * ymax, 1e-9);
    EXPECT_THROW(c11s_norm(GridFunction(g, 1.0), DomainWindow::rectangle(-1, 0, 0, 0.5)), std::invalid_argument);
}

TEST(C2Alpha, ConstantAndLinear) {
    const auto g = unit_grid(17);
    const auto w = DomainWindow::rectangle(0.2, 0.8, 0.0, 0.8);
    EXPECT_NEAR(c2alpha_s_norm(GridFunction(g, 0.7), w, 0.5).value, 0.7, 1e-15);
    const auto f = GridFunction::sample(g, [](Point p) { return p.x; });
    const auto r = c2alpha_s_norm(f, w, 0.5);
    const double holder_x = holder_s_seminorm(f, w, 0.5).value;
    double xmax = 0;
    for (auto k : w.nodes(*g)) xmax = std::max(xmax, g->node(k).x);
    EXPECT_NEAR(r.parts.at("u_sup"), xmax, 1e-15);
    EXPECT_NEAR(r.parts.at("ux_sup"), 1.0, 1e-12);
    EXPECT_NEAR(r.parts.at("ux_holder"), 0.0, 1e-10);
    EXPECT_NEAR(r.value, xmax + holder_x + 1.0, 1e-9);
}

TEST(C2Alpha, QuadraticAgainstExhaustiveOracle) {
    const auto g = unit_grid(13);
    // kept off y = 0, where u_y is a forward difference and not exact
    const auto w = DomainWindow::rectangle(0.1, 0.9, 0.1, 0.9);
    const auto f = GridFunction::sample(g, [](Point p) { return p.x * p.x - p.x * p.y + 0.5 * p.y * p.y; });
    const auto r = c2alpha_s_norm(f, w, 0.5);
    // y u_xx = 2y, y u_xy = -y, y u_yy = y exactly (quadratic), u_x = 2x - y, u_y = -x + y
    const auto field = [&](auto fn) { return GridFunction::sample(g, fn); };
    double want = 0.0;
    for (auto fn : {std::function<double(Point)>([](Point p) { return p.x * p.x - p.x * p.y + 0.5 * p.y * p.y; }),
                    std::function<double(Point)>([](Point p) { return 2 * p.x - p.y; }),
                    std::function<double(Point)>([](Point p) { return -p.x + p.y; }),
                    std::function<double(Point)>([](Point p) { return 2 * p.y; }),
                    std::function<double(Point)>([](Point p) { return -p.y; }),
                    std::function<double(Point)>([](Point p) { return p.y; })}) {
        const auto h = field(fn);
        double sup = 0;
        for (auto k : w.nodes(*g)) sup = std::max(sup, std::abs(h[k]));
        want += sup + brute_holder(h, w, 0.5);
    }
    EXPECT_NEAR(r.value, want, 1e-9);
}

TEST(H2Weighted, ZeroHomogeneityAndQuadrature) {
    const HestonParams p(1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 1.0);  // beta = 1, mu = 2
    const double delta = 0.1;
    const auto g = patch(0.0, 1.0, delta, 1.0, 1001, 1001);
    const auto w = DomainWindow::rectangle(0.0, 1.0, delta, 1.0);
    EXPECT_EQ(h2_weighted_norm(GridFunction(g, 0.0), p, w).value, 0.0);
    const auto f = GridFunction::sample(g, [](Point z) { return std::sin(z.x) + z.y * z.y; });
    const double n1 = h2_weighted_norm(f, p, w).value;
    GridFunction f3(g, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) f3[k] = -3.0 * f[k];
    EXPECT_NEAR(h2_weighted_norm(f3, p, w).value, 3.0 * n1, 1e-12 * n1);

    // u = 1: sqrt of int (1+y) e^{-x} e^{-2y} over [0,1] x [delta,1]
    const double ix = 1.0 - std::exp(-1.0);
    auto fy = [](double y) { return (1 + y) * std::exp(-2 * y); };
    const int m = 20000;
    double iy = fy(delta) + fy(1.0);
    for (int k = 1; k < m; ++k) iy += fy(delta + (1 - delta) * k / m) * (k % 2 ? 4 : 2);
    iy *= (1 - delta) / (3.0 * m);
    const double want = std::sqrt(ix * iy);
    EXPECT_NEAR(h2_weighted_norm(GridFunction(g, 1.0), p, w).value / want, 1.0, 1e-6);
}

TEST(Norms, TriangleInequalityAndHomogeneity) {
    const auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 21, 21);
    const auto w = DomainWindow::rectangle(-0.5, 0.5, 0.0, 0.8);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> a(g->size()), b(g->size()), s(g->size()), m(g->size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] = u(rng);
            b[k] = u(rng);
            s[k] = a[k] + b[k];
            m[k] = -2.0 * a[k];
        }
        const GridFunction fa(g, a), fb(g, b), fs(g, s), fm(g, m);
        EXPECT_LE(c11s_norm(fs, w).value, c11s_norm(fa, w).value + c11s_norm(fb, w).value + 1e-12);
        EXPECT_LE(c2alpha_s_norm(fs, w, 0.5).value, c2alpha_s_norm(fa, w, 0.5).value + c2alpha_s_norm(fb, w, 0.5).value + 1e-10);
        EXPECT_NEAR(c11s_norm(fm, w).value, 2.0 * c11s_norm(fa, w).value, 1e-12 * c11s_norm(fa, w).value);
    }
}

TEST(Window, HalfBallClipsAndSerialises) {
    const auto w = DomainWindow::half_ball({0.0, 0.0}, 1.0);
    EXPECT_TRUE(w.contains({0.0, 0.5}));
    EXPECT_FALSE(w.contains({0.0, -0.1}));
    EXPECT_EQ(w.to_json()["shape"], "half_ball");
    EXPECT_THROW(DomainWindow::ball({0.0, -2.0}, 1.0), std::invalid_argument);
}
