#include <gtest/gtest.h>

#include <cmath>

#include "hestonlab/regularity.hpp"
#include "oracles.hpp"

using namespace hestonlab;

namespace {

HestonParams put_params() { return {0.4, -0.5, 0.05, 0.0, 1.5, 0.04, 1.0}; }

const PolynomialObstacle kPoly({0.2, 0.1, -0.05, -0.6, 0.15, -0.3, 0.05, 0.0, -0.02, 0.01});

}  // namespace

TEST(LinearApprox, MatchesJetAndTaylorBound) {
    const Point p0{0.1, 0.4};
    const auto l = linear_approx(kPoly, p0);
    const auto j = kPoly.jet(p0);
    EXPECT_DOUBLE_EQ(l.value, j.u);
    EXPECT_DOUBLE_EQ(l.gx, j.ux);
    EXPECT_DOUBLE_EQ(l.gy, j.uy);
    EXPECT_DOUBLE_EQ(l(p0), j.u);
    const double c11 = c11_norm(kPoly, DomainWindow::ball(p0, 0.2));
    const auto t = taylor_check(kPoly, p0, 0.5, c11);
    EXPECT_TRUE(t.ok);
    EXPECT_GT(t.max_residual, 0.0);
    EXPECT_LE(t.max_residual, t.bound);
}

TEST(Rho0, ClosedForms) {
    const auto p = put_params();
    EXPECT_DOUBLE_EQ(boundary_rho0(p, 10.0), 0.01);  // theta / 4
    const HestonParams big_r(0.4, -0.5, 2.0, 0.0, 1.5, 0.04);
    EXPECT_DOUBLE_EQ(boundary_rho0(big_r, 10.0), 1.5 * 0.04 / 18.0);
    EXPECT_DOUBLE_EQ(boundary_rho0(p, 0.01), 0.002);  // R0 / 5
    EXPECT_DOUBLE_EQ(interior_rho0(p, 10.0), std::min(1.0, barrier_rho0(p)));
    const HestonParams huge_r(0.4, -0.5, 100.0, 0.0, 1.5, 0.04);
    EXPECT_DOUBLE_EQ(interior_rho0(huge_r, 10.0), std::min(0.1, barrier_rho0(huge_r)));
}

TEST(MeasureConstants, ZeroAndAffine) {
    const auto p = put_params();
    const auto w = DomainWindow::rectangle(-0.5, 0.5, 0.2, 0.8);
    const auto z = measure_constants(ConstantObstacle(0.0), w, p);
    EXPECT_TRUE(z.zero_obstacle);
    EXPECT_EQ(z.M, 0.0);
    EXPECT_EQ(z.N, 0.0);
    // affine psi: l = psi, and the lattice holds the rectangle corners
    const PolynomialObstacle aff({0.3, -0.4, 0.7, 0, 0, 0, 0, 0, 0, 0});
    const auto c = measure_constants(aff, w, p);
    EXPECT_FALSE(c.zero_obstacle);
    EXPECT_NEAR(c.K_raw * c.psi_c11, c.K_prime_raw * p.kappa() * p.theta() * c.psi_c11, 1e-12);
    EXPECT_GT(c.K, 2.0);
    EXPECT_NEAR(c.M, c.K * c.psi_c11, 1e-14);
    // 1 + 2x - y peaks at (0.5, 0.2)
    EXPECT_NEAR(affine_sup(1.0, 2.0, -1.0, w), 1.8, 1e-14);
}

TEST(Zeta, ConstantWhenSourceVanishes) {
    // r = 0 and a constant obstacle: L l = 0, so zeta is the boundary value
    const HestonParams p(0.4, -0.5, 0.0, 0.0, 1.5, 0.04);
    const double M = 3.0, y0 = 0.5, rho = 0.2;
    const auto z = solve_zeta(p, ConstantObstacle(1.0), {0.0, y0}, rho, M);
    const double b = 10 * M * y0 * rho * rho;
    EXPECT_NEAR(z.boundary_value, b, 1e-14);
    for (std::size_t k = 0; k < z.solution.size(); ++k) EXPECT_NEAR(z.solution[k], b, 1e-9 * b);
    EXPECT_TRUE(z.pass());
}

TEST(Zeta, HomogeneousInObstacleAndScale) {
    const auto p = put_params();
    const Point p0{0.0, 0.5};
    const auto a = solve_zeta(p, kPoly, p0, 0.2, 4.0);
    std::array<double, 10> c2 = kPoly.coefficients();
    for (auto& c : c2) c *= 2.0;
    const auto b = solve_zeta(p, PolynomialObstacle(c2), p0, 0.2, 8.0);
    ASSERT_EQ(a.solution.size(), b.solution.size());
    for (std::size_t k = 0; k < a.solution.size(); ++k)
        EXPECT_NEAR(b.solution[k], 2.0 * a.solution[k], 1e-9 * std::abs(a.solution[k]) + 1e-13);
}

TEST(Zeta, BoundsAtCentreOfHalfPlane) {
    const auto p = put_params();
    const Point p0{0.0, 0.5};
    const double rho = 0.5 * interior_rho0(p, 1.0);
    const auto c = measure_constants(kPoly, DomainWindow::ball(p0, rho * p0.y), p);
    const auto z = solve_zeta(p, kPoly, p0, rho, c.M);
    EXPECT_EQ(z.kind, "zeta");
    EXPECT_EQ(z.levels.size(), 3u);
    EXPECT_TRUE(z.pass()) << z.to_json().dump();
    const auto& fine = z.levels.back();
    EXPECT_GE(fine.min, z.lower_bound - fine.slack);
    EXPECT_LE(fine.max, z.upper_bound + fine.slack);
    EXPECT_THROW(solve_zeta(p, kPoly, {0.0, 1.5}, rho, c.M), std::invalid_argument);
}

TEST(Xi, ArcValueAndBounds) {
    const auto p = put_params();
    const Point p0{-0.2, 0.0};
    const double rho = 0.5 * boundary_rho0(p, 1.0);
    const auto c = measure_constants(kPoly, DomainWindow::half_ball(p0, rho), p);
    const auto x = solve_xi(p, kPoly, p0, rho, c.N);
    EXPECT_EQ(x.kind, "xi");
    EXPECT_NEAR(x.boundary_value, 10 * c.N * rho, 1e-14);
    std::size_t outside = 0;
    for (std::size_t k = 0; k < x.solution.size(); ++k)
        if (!x.in_ball[k]) {
            EXPECT_DOUBLE_EQ(x.solution[k], x.boundary_value);
            ++outside;
        }
    EXPECT_GT(outside, 0u);
    EXPECT_TRUE(x.pass()) << x.to_json().dump();
    // homogeneity in N with psi scaled alongside
    std::array<double, 10> c3 = kPoly.coefficients();
    for (auto& v : c3) v *= 3.0;
    const auto x3 = solve_xi(p, PolynomialObstacle(c3), p0, rho, 3.0 * c.N);
    for (std::size_t k = 0; k < x.solution.size(); ++k)
        EXPECT_NEAR(x3.solution[k], 3.0 * x.solution[k], 1e-9 * std::abs(x.solution[k]) + 1e-13);
}

TEST(Growth, DegenerateWhenNoGap) {
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 41, 41);
    const auto psi = sample(kPoly, g);
    const std::vector<double> radii{0.4, 0.2, 0.1};
    const auto rep = growth_profile(psi, psi, {0.0, 0.5}, Regime::interior, radii, 1.0);
    EXPECT_TRUE(rep.degenerate);
    EXPECT_TRUE(std::isnan(rep.slope));
    EXPECT_THROW(growth_profile(psi, psi, {0.0, 0.5}, Regime::interior, std::vector<double>{0.1, 0.2, 0.05}, 1.0),
                 std::invalid_argument);
}

TEST(Growth, QuadraticSlopeOnOneDimensionalOracle) {
    // -u'' = 0, u(+-2) = 0, psi = 1 - x^2: contact set |x| <= 2 - sqrt 3 and
    // u - psi = (|x| - x0)^2 just outside it
    const std::size_t n = 4095;
    const auto m = oracle::laplacian_1d(n, -2.0, 2.0);
    CsrBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = (i ? i - 1 : 0); j <= std::min(n - 1, i + 1); ++j) b.add(j, m[i * n + j]);
        b.finish_row(i);
    }
    auto g = std::make_shared<const Grid>(Grid::patch(-2.0, 2.0, 0.5, 1.5, n + 2, 3));
    std::vector<double> psi1(n), f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) psi1[i] = 1 - g->x(i + 1) * g->x(i + 1);
    const std::vector<NodeKind> kind(n, NodeKind::interior);
    LcpOptions o;
    o.max_iter = n;  // the contact set may move a few nodes per policy
    const auto sol = solve_lcp(b.build(), f, kind, psi1, o);
    std::vector<double> uv(g->size()), pv(g->size());
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < n + 2; ++i) {
            const double x = g->x(i);
            pv[g->index(i, j)] = 1 - x * x;
            uv[g->index(i, j)] = (i == 0 || i == n + 1) ? 0.0 : sol.u[i - 1];
        }
    const GridFunction u(g, uv), psi(g, pv);
    const double x0 = 2 - std::sqrt(3.0);
    std::vector<double> radii;
    for (int k = 0; k < 5; ++k) radii.push_back(0.4 * std::pow(0.5, k));
    const auto rep = growth_profile(u, psi, {x0, 1.0}, Regime::interior, radii, 1.0);
    EXPECT_FALSE(rep.degenerate);
    EXPECT_GE(rep.slope, 1.8);
    EXPECT_LE(rep.slope, 2.2);
    for (std::size_t k = 0; k < radii.size(); ++k)
        EXPECT_NEAR(rep.sup_gap[k], 0.25 * radii[k] * radii[k], 0.05 * radii[k] * radii[k]);
}

TEST(Loglog, SlopeOfPowerLaw) {
    const std::vector<double> r{1.0, 0.5, 0.25, 0.125}, v{3.0, 0.75, 0.1875, 0.046875};
    EXPECT_NEAR(loglog_slope(r, v), 2.0, 1e-12);
    EXPECT_TRUE(std::isnan(loglog_slope(r, std::vector<double>{0, 0, 0, 1})));
}

TEST(HarmonicSplit, ConstantSupersolution) {
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 0.6, 21, 21);
    const auto sys = build_system(put_params(), g, ConstantObstacle(0), ConstantObstacle(0));
    const auto s = harmonic_split(GridFunction(g, 2.0), sys);
    EXPECT_TRUE(s.hypothesis_ok);
    EXPECT_TRUE(s.lower_ok);
    EXPECT_TRUE(s.upper_ok);
    for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(s.w1[k] + s.w2[k], 2.0, 1e-14);
    // r = 0: constants are L-harmonic
    const HestonParams p0(0.4, -0.5, 0.0, 0.0, 1.5, 0.04);
    const auto sys0 = build_system(p0, g, ConstantObstacle(0), ConstantObstacle(0));
    const auto s0 = harmonic_split(GridFunction(g, 2.0), sys0);
    for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(s0.w2[k], 0.0, 1e-9);
}

TEST(Harnack, ConstantGivesOne) {
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 21, 21);
    const auto h = harnack_quotient(GridFunction(g, 0.3), DomainWindow::ball({0.0, 0.5}, 0.4));
    EXPECT_DOUBLE_EQ(h.ratio, 1.0);
    EXPECT_FALSE(h.floored);
    EXPECT_GT(h.nodes, 0u);
    const auto z = harnack_quotient(GridFunction(g, 0.0), DomainWindow::ball({0.0, 0.5}, 0.4));
    EXPECT_TRUE(z.floored);
}

TEST(Certificate, ConstantSolutionGivesHalf) {
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 33, 33);
    const GridFunction u(g, 0.8), f(g, 0.0);
    const auto lv = certificate_level(u, u, f, DomainWindow::half_ball({0.0, 0.0}, 0.25),
                                      DomainWindow::half_ball({0.0, 0.0}, 0.5));
    EXPECT_NEAR(lv.ratio, 0.5, 1e-12);
    EXPECT_NEAR(lv.d2_sup_near_axis, 0.0, 1e-12);
    const auto rep = c11s_certificate({lv, lv, lv});
    EXPECT_TRUE(rep.bounded);
    EXPECT_NEAR(rep.median, 0.5, 1e-12);
    EXPECT_THROW(c11s_certificate({lv, lv}), std::invalid_argument);
}

TEST(StrongMax, ConstantComponentAndBoundaryMaximum) {
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 11, 11);
    const auto sys = build_system(put_params(), g, ConstantObstacle(0), ConstantObstacle(0));
    const auto c = strong_max_probe(sys, GridFunction(g, 1.0));
    EXPECT_TRUE(c.attained_at_equation_node);
    EXPECT_TRUE(c.constant);
    EXPECT_EQ(c.component_size, sys.equation_rows().size());
    const auto x = strong_max_probe(sys, GridFunction::sample(g, [](Point p) { return p.x; }));
    EXPECT_FALSE(x.attained_at_equation_node);
    EXPECT_EQ(g->col(x.argmax), 10u);
}
