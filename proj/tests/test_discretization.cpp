#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hestonlab/discretization.hpp"
#include "hestonlab/lcp.hpp"
#include "oracles.hpp"

using namespace hestonlab;

namespace {

HestonParams put_params() { return {0.4, -0.5, 0.05, 0.0, 1.5, 0.04, 1.0}; }

DiscreteSystem make(const HestonParams& p, std::size_t nx, std::size_t ny, double grading = 1.0,
                    SchemeOptions scheme = {}) {
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, nx, ny, grading);
    return build_system(p, g, ConstantObstacle(0.0), ConstantObstacle(0.0), scheme);
}

}  // namespace

TEST(Grid, Construction) {
    const Grid g(-1.0, 2.0, 1.0, 7, 9, 0.9);
    EXPECT_EQ(g.y(0), 0.0);
    EXPECT_EQ(g.y(8), 1.0);
    for (std::size_t j = 1; j < 9; ++j) EXPECT_GT(g.y(j), g.y(j - 1));
    // graded toward the axis
    EXPECT_LT(g.y(1) - g.y(0), g.y(8) - g.y(7));
    EXPECT_THROW(Grid(0, 1, 1, 2, 5), std::invalid_argument);
    EXPECT_THROW(Grid(0, 1, 1, 5, 5, 1.5), std::invalid_argument);
    const auto fine = g.refined();
    EXPECT_EQ(fine.nx(), 13u);
    EXPECT_EQ(fine.ny(), 17u);
}

TEST(Grid, InterpolationExactOnBilinear) {
    const auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 9, 7, 0.8);
    const auto f = GridFunction::sample(g, [](Point p) { return 1 + 2 * p.x - p.y + 3 * p.x * p.y; });
    for (Point p : {Point{0.13, 0.71}, Point{-0.99, 0.02}, Point{0.5, 0.5}})
        EXPECT_NEAR(f.interpolate(p), 1 + 2 * p.x - p.y + 3 * p.x * p.y, 1e-14);
}

TEST(BuildSystem, ConstantsGiveR) {
    for (double grading : {1.0, 0.9}) {
        const auto sys = make(put_params(), 9, 9, grading);
        const auto mu = multiply(sys.matrix, std::vector<double>(sys.size(), 1.0));
        for (std::size_t k = 0; k < sys.size(); ++k)
            if (!sys.is_dirichlet(k)) EXPECT_NEAR(mu[k], put_params().r(), 1e-10);
    }
}

TEST(BuildSystem, AxisRowOnLinearY) {
    const auto p = put_params();
    const auto sys = make(p, 9, 9, 0.9);
    std::vector<double> u(sys.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = sys.grid->node(k).y;
    const auto mu = multiply(sys.matrix, u);
    for (std::size_t k = 0; k < sys.size(); ++k)
        if (sys.kind[k] == NodeKind::axis) EXPECT_NEAR(mu[k], -p.kappa() * p.theta(), 1e-12);
}

TEST(BuildSystem, AxisRowHasNoGhostNodes) {
    const auto sys = make(put_params(), 11, 9);
    const Grid& g = *sys.grid;
    for (std::size_t k = 0; k < sys.size(); ++k) {
        if (sys.kind[k] != NodeKind::axis) continue;
        for (std::size_t e = sys.matrix.row_ptr[k]; e < sys.matrix.row_ptr[k + 1]; ++e)
            EXPECT_LE(g.row(sys.matrix.cols[e]), 1u);
    }
}

TEST(BuildSystem, SignPatternWithoutCorrelation) {
    const HestonParams p(0.4, 0.0, 0.05, 0.0, 1.5, 0.04);
    const auto sys = make(p, 5, 5);
    const auto dense = sys.matrix.dense();
    const std::size_t n = sys.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (sys.is_dirichlet(i)) continue;
        EXPECT_GT(dense[i * n + i], 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) EXPECT_LE(dense[i * n + j], 0.0);
    }
    EXPECT_TRUE(check_m_matrix(sys).ok());
}

TEST(CheckMMatrix, DirectionalIsMonotoneFourPointIsNot) {
    const auto p = put_params();
    // hy = |sigma| hx is inside the monotone band |rho| sigma hx <= hy <= sigma hx / |rho|
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 0.6, 41, 41);
    const auto dir = build_system(p, g, ConstantObstacle(0), ConstantObstacle(0));
    EXPECT_TRUE(dir.m_matrix.ok());
    SchemeOptions four{CrossStencil::four_point, true};
    const auto fp = build_system(p, g, ConstantObstacle(0), ConstantObstacle(0), four);
    EXPECT_GT(fp.m_matrix.sign_violations, 0u);
}

TEST(CheckMMatrix, StrongCorrelationOnCoarseGrid) {
    const HestonParams p(1.0, -0.99, 0.05, 0.0, 1.5, 0.04);
    const auto sys = make(p, 5, 5);
    EXPECT_FALSE(check_m_matrix(sys).ok());
    EXPECT_FALSE(check_m_matrix(sys).examples.empty());
}

TEST(DiscreteApply, DenseOracleAndPassThrough) {
    const auto p = put_params();
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, 8, 10, 0.9);
    const auto f = GridFunction::sample(g, [](Point z) { return std::cos(z.x) * z.y; });
    const auto gb = GridFunction::sample(g, [](Point z) { return z.x + 2.0; });
    const auto sys = build_system(p, g, gb, f);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(sys.size());
    for (auto& x : v) x = u(rng);
    const GridFunction uv(g, v);
    const auto got = discrete_apply(sys, uv);
    const auto want = oracle::dense_matvec(sys.matrix.dense(), v);
    for (std::size_t k = 0; k < sys.size(); ++k) {
        if (sys.is_dirichlet(k))
            EXPECT_DOUBLE_EQ(got[k], gb[k] - v[k]);
        else
            EXPECT_NEAR(got[k], want[k] - f[k], 1e-14 * (1 + std::abs(want[k])));
    }
    const auto zero = discrete_apply(sys, GridFunction(g, 0.0));
    for (std::size_t k = 0; k < sys.size(); ++k)
        if (!sys.is_dirichlet(k)) EXPECT_EQ(zero[k], -f[k]);
    EXPECT_THROW(discrete_apply(sys, GridFunction(std::make_shared<const Grid>(0, 1, 1, 3, 3), 0.0)), std::invalid_argument);
}

TEST(BuildSystem, ConsistencyOrders) {
    // residual of M u + L u at fixed nodes for a cubic u, under refinement
    const auto p = put_params();
    const PolynomialObstacle poly({0.3, -0.2, 0.5, 0.7, -0.4, 0.6, 0.25, -0.3, 0.2, 0.15});
    std::vector<double> h, err_in, err_axis;
    for (std::size_t n : {17, 33, 65, 129}) {
        auto g = std::make_shared<const Grid>(-1.0, 1.0, 1.0, n, n);
        const auto sys = build_system(p, g, ConstantObstacle(0), ConstantObstacle(0));
        const auto u = sample(poly, g);
        const auto mu = multiply(sys.matrix, u.values());
        double ei = 0, ea = 0;
        for (std::size_t k = 0; k < sys.size(); ++k) {
            const Point z = g->node(k);
            const double e = std::abs(mu[k] + apply_L(p, poly.jet(z), z));
            if (sys.kind[k] == NodeKind::axis) ea = std::max(ea, e);
            if (sys.kind[k] == NodeKind::interior && z.y >= 0.25 && z.y <= 0.75) ei = std::max(ei, e);
        }
        h.push_back(g->hx());
        err_in.push_back(ei);
        err_axis.push_back(ea);
    }
    // the coarsest mesh upwinds part of the drift; orders are read off the finer three
    auto slope = [&](const std::vector<double>& e) { return std::log(e[1] / e.back()) / std::log(h[1] / h.back()); };
    EXPECT_NEAR(slope(err_in), 2.0, 0.3);
    EXPECT_GE(slope(err_axis), 0.7);
}

TEST(BuildSystem, WeakMaximumPrinciple) {
    const auto p = put_params();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto g = std::make_shared<const Grid>(-1.0, 1.0, 0.6, 21, 21);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> f(g->size()), gb(g->size());
        for (std::size_t k = 0; k < f.size(); ++k) {
            f[k] = -u(rng);
            gb[k] = -u(rng);
        }
        const auto sys = build_system(p, g, GridFunction(g, gb), GridFunction(g, f));
        ASSERT_TRUE(sys.m_matrix.ok());
        const auto v = solve_dirichlet(sys);
        for (std::size_t k = 0; k < v.size(); ++k) EXPECT_LE(v[k], 1e-12);
    }
}

TEST(BuildSystem, CooExportAndHeader) {
    const auto sys = make(put_params(), 5, 4);
    std::ostringstream os;
    write_coo(sys, os);
    std::istringstream is(os.str());
    std::size_t r, c, lines = 0;
    double v;
    while (is >> r >> c >> v) {
        EXPECT_DOUBLE_EQ(sys.matrix.at(r, c), v);
        ++lines;
    }
    EXPECT_EQ(lines, sys.matrix.nnz());
    const auto h = system_header(sys);
    EXPECT_EQ(h["grid"]["nx"], 5);
    EXPECT_TRUE(h.contains("node_kinds"));
}

TEST(BuildSystem, ParallelAssemblyIsDeterministic) {
    const auto a = make(put_params(), 65, 33, 0.9);
    const auto b = make(put_params(), 65, 33, 0.9);
    EXPECT_EQ(a.matrix.vals, b.matrix.vals);
    EXPECT_EQ(a.matrix.cols, b.matrix.cols);
}
