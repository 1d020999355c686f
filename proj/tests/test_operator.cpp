#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hestonlab/obstacle.hpp"
#include "hestonlab/operator.hpp"
#include "oracles.hpp"

using namespace hestonlab;

namespace {

HestonParams put_params() { return {0.4, -0.5, 0.05, 0.0, 1.5, 0.04, 1.0}; }

}  // namespace

TEST(HestonParams, RejectsInvalid) {
    EXPECT_THROW(HestonParams(0.0, 0.0, 0.05, 0.0, 1.0, 0.04), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, 1.0, 0.05, 0.0, 1.0, 0.04), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, -1.0, 0.05, 0.0, 1.0, 0.04), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, 0.0, -0.01, 0.0, 1.0, 0.04), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, 0.0, 0.05, -0.1, 1.0, 0.04), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, 0.0, 0.05, 0.0, 0.0, 0.04), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, 0.0, 0.05, 0.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(HestonParams(0.4, 0.0, 0.05, 0.0, 1.0, 0.04, 0.0), std::invalid_argument);
    EXPECT_NO_THROW(HestonParams(-0.4, 0.0, 0.0, 0.0, 1.0, 0.04));
}

TEST(HestonParams, DerivedExponents) {
    const HestonParams p(0.5, 0.0, 0.0, 0.0, 2.0, 0.25);
    EXPECT_DOUBLE_EQ(p.beta(), 2.0 * 2.0 * 0.25 / 0.25);
    EXPECT_DOUBLE_EQ(p.mu(), 2.0 * 2.0 / 0.25);
}

TEST(ApplyL, ElementaryJets) {
    const auto p = put_params();
    for (Point z : {Point{0.0, 0.0}, Point{-1.3, 0.2}, Point{0.7, 2.0}}) {
        EXPECT_DOUBLE_EQ(apply_L(p, {1, 0, 0, 0, 0, 0}, z), -p.r());
        EXPECT_NEAR(apply_L(p, {z.y, 0, 1, 0, 0, 0}, z), p.kappa() * (p.theta() - z.y) - p.r() * z.y, 1e-15);
        EXPECT_NEAR(apply_L(p, {z.x, 1, 0, 0, 0, 0}, z), (p.r() - p.q() - z.y / 2) - p.r() * z.x, 1e-15);
    }
}

TEST(ApplyL, RejectsBadInput) {
    const auto p = put_params();
    EXPECT_THROW(apply_L(p, {}, {0.0, -1e-3}), std::invalid_argument);
    EXPECT_THROW(apply_L(p, {NAN, 0, 0, 0, 0, 0}, {0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(apply_L(p, {0, 0, 0, INFINITY, 0, 0}, {0.0, 1.0}), std::invalid_argument);
}

TEST(ApplyL, MatchesWrittenOutOperator) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto p = put_params();
    for (int k = 0; k < 200; ++k) {
        const Jet2 j{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const Point z{2 * u(rng), 1 + u(rng)};
        const double want = oracle::heston_L(0.4, -0.5, 0.05, 0.0, 1.5, 0.04, j, z.y);
        EXPECT_NEAR(apply_L(p, j, z), want, 1e-14);
    }
}

TEST(ApplyL, LinearInJet) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto p = put_params();
    for (int k = 0; k < 100; ++k) {
        const Jet2 a{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const Jet2 b{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const double al = u(rng), be = u(rng);
        const Point z{u(rng), 1 + u(rng)};
        EXPECT_NEAR(apply_L(p, a * al + b * be, z), al * apply_L(p, a, z) + be * apply_L(p, b, z), 1e-14);
    }
}

TEST(ApplyL, SymbolDegeneratesOnAxis) {
    const auto p = put_params();
    for (double y : {0.0, 0.01, 0.5, 3.0}) {
        const auto c = heston_coefficients(p, y);
        const double det = c.a11 * c.a22 - c.a12 * c.a12;
        const double want = y * y * p.sigma() * p.sigma() / 4.0 * (1 - p.rho_corr() * p.rho_corr());
        EXPECT_NEAR(det, want, 1e-16);
        if (y > 0) EXPECT_GT(det, 0.0);
    }
}

TEST(Weight, ClosedForms) {
    EXPECT_NEAR(weight(HestonParams(1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 1.0), {0.0, 1.0}), std::exp(-2.0), 1e-15);
    const HestonParams b1(1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 3.0);
    for (double y : {0.1, 0.7, 2.0}) EXPECT_NEAR(weight(b1, {0.0, y}), std::exp(-b1.mu() * y), 1e-15);
    // e^{-1.5} to 30 digits: 0.223130160148429828933280470764
    EXPECT_NEAR(weight(HestonParams(2.0, 0.0, 0.0, 0.0, 2.0, 1.0, 0.5), {1.0, 1.0}), 0.223130160148429828933280470764,
                1e-16);
    EXPECT_THROW(weight(b1, {0.0, 0.0}), std::invalid_argument);
}

TEST(Weight, DecreasingInAbsXAndIntegrable) {
    const HestonParams p(1.0, 0.0, 0.0, 0.0, 1.0, 0.5, 1.5);
    for (double x = 0.0; x < 5.0; x += 0.25) {
        EXPECT_GT(weight(p, {x, 0.3}), weight(p, {x + 0.25, 0.3}));
        EXPECT_DOUBLE_EQ(weight(p, {x, 0.3}), weight(p, {-x, 0.3}));
    }
    // x-integral of the weight at fixed y equals y^{beta-1} e^{-mu y} 2 / gamma.
    const double y = 0.4, h = 1e-3;
    double sum = 0.0;
    for (double x = -40.0 + h / 2; x < 40.0; x += h) sum += weight(p, {x, y}) * h;
    const double want = std::pow(y, p.beta() - 1) * std::exp(-p.mu() * y) * 2.0 / 1.5;
    EXPECT_NEAR(sum / want, 1.0, 1e-6);
}

namespace {

// u is a random cubic; v is its rescaling, evaluated by the chain rule at
// the image point (xbar, ybar).
void check_identity(RescalingKind kind, double tol) {
    std::mt19937_64 rng(kind == RescalingKind::y0 ? 1 : kind == RescalingKind::rho ? 2 : 3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto p = put_params();
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const PolynomialObstacle poly(oracle::random_cubic(rng));
        const double x0 = -1 + 2 * u01(rng), y0 = 0.05 + 0.9 * u01(rng);
        double s = 0, w = 1;
        RescaledCoefficients rc = rescale_y0(p, y0);
        if (kind == RescalingKind::y0) {
            s = y0;
        } else if (kind == RescalingKind::rho) {
            const double rho = 0.05 + 0.9 * u01(rng);
            rc = rescale_rho(p, y0, rho);
            s = rho;
        } else {
            const double d = 1.5 + 10 * u01(rng);
            rc = rescale_d(p, y0, d);
            s = d * y0;
            w = s;
        }
        const Point z{-0.5 + u01(rng), -0.4 + 0.8 * u01(rng)};
        const Point zbar{x0 + s * z.x, y0 + s * z.y};
        if (zbar.y < 0) continue;
        const Jet2 ju = poly.jet(zbar);
        const Jet2 jv = oracle::chain_rule(ju, s, w);
        const double lhs = (kind == RescalingKind::d ? 1.0 : s) * apply_L(p, ju, zbar);
        const double rhs = rc.apply(jv, z);
        const double scale = std::max({1.0, std::abs(lhs), std::abs(ju.u), std::abs(ju.ux), std::abs(ju.uxx)});
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    EXPECT_LE(worst, tol);
}

}  // namespace

TEST(Rescaling, IdentityY0) { check_identity(RescalingKind::y0, 1e-12); }
TEST(Rescaling, IdentityRho) { check_identity(RescalingKind::rho, 1e-12); }
TEST(Rescaling, IdentityD) { check_identity(RescalingKind::d, 1e-12); }

TEST(Rescaling, Y0Coefficients) {
    const auto p = put_params();
    const auto rc = rescale_y0(p, 0.3);
    EXPECT_DOUBLE_EQ(rc.at({0.0, 0.0}).a11, 0.5);
    for (double y = -0.49; y < 0.5; y += 0.07) {
        const auto c = rc.at({0.2, y});
        EXPECT_GT(c.a11, 0.25);
        EXPECT_LT(c.a11, 0.75);
        EXPECT_NEAR(c.a12, p.rho_corr() * p.sigma() * (1 + y) / 2, 1e-15);
        EXPECT_NEAR(c.a22, p.sigma() * p.sigma() * (1 + y) / 2, 1e-15);
        EXPECT_NEAR(c.b1, p.r() - p.q() - 0.3 * (1 + y) / 2, 1e-15);
        EXPECT_NEAR(c.b2, p.kappa() * (p.theta() - 0.3 * (1 + y)), 1e-15);
        EXPECT_NEAR(c.c, -p.r() * 0.3, 1e-15);
    }
    const auto r0 = rescale_y0(HestonParams(0.4, -0.5, 0.0, 0.0, 1.5, 0.04), 0.5);
    EXPECT_EQ(r0.at({1.0, 0.2}).c, 0.0);
    EXPECT_THROW(rescale_y0(p, 0.0), std::invalid_argument);
    EXPECT_THROW(rescale_y0(p, 1.5), std::invalid_argument);
}

TEST(Rescaling, RhoDegeneracyAndDrift) {
    const auto p = put_params();
    const auto rc = rescale_rho(p, 0.1, 0.2);
    const double yd = rc.degeneracy_y();
    EXPECT_DOUBLE_EQ(yd, -0.5);
    const auto c = rc.at({0.3, yd});
    EXPECT_EQ(c.a11, 0.0);
    EXPECT_EQ(c.a12, 0.0);
    EXPECT_EQ(c.a22, 0.0);
    // y_rho = theta kills the variance drift
    const double y_theta = (p.theta() - 0.1) / 0.2;
    EXPECT_NEAR(rc.at({0.0, y_theta}).b2, 0.0, 1e-16);
    EXPECT_THROW(rescale_rho(p, 0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(rescale_rho(p, -0.1, 0.2), std::invalid_argument);
}

TEST(Rescaling, DAtAxis) {
    const auto p = put_params();
    const double d = 4.0;
    const auto rc = rescale_d(p, 0.2, d);
    EXPECT_DOUBLE_EQ(rc.at({0.0, 0.0}).a11, 0.5 / d);
    EXPECT_DOUBLE_EQ(rc.degeneracy_y(), -1.0 / d);
    EXPECT_NEAR(rc.at({0.0, 0.0}).c, -p.r() * d * 0.2, 1e-16);
    EXPECT_THROW(rescale_d(p, 0.2, 1.0), std::invalid_argument);
    EXPECT_THROW(rescale_d(p, 0.0, 2.0), std::invalid_argument);
}

TEST(Barrier, ClosedFormMatchesOperator) {
    const auto p = put_params();
    const auto rc = rescale_y0(p, 0.4);
    EXPECT_EQ(barrier_theta(0.0, {0.3, 0.1}, rc).value, 0.0);
    EXPECT_EQ(barrier_theta(0.0, {0.3, 0.1}, rc).image, 0.0);
    const HestonParams rq(0.4, -0.5, 0.05, 0.05, 1.5, 0.04);
    EXPECT_DOUBLE_EQ(barrier_theta(4.0, {0.0, 0.0}, rescale_y0(rq, 0.4)).image, 4.0);
    for (double a : {-8.0, 4.0})
        for (double x = -0.4; x <= 0.4; x += 0.1)
            for (double y = -0.4; y <= 0.4; y += 0.1) {
                const Jet2 j{a * x * x, 2 * a * x, 0, 2 * a, 0, 0};
                EXPECT_NEAR(barrier_theta(a, {x, y}, rc).image, rc.apply(j, {x, y}), 1e-13);
            }
}

TEST(Barrier, SignOnHalfRho0Ball) {
    const auto p = put_params();
    const double rho = barrier_rho0(p) / 2;
    for (double y0 : {0.05, 0.5, 1.0}) {
        const auto rc = rescale_y0(p, y0);
        for (double a : {-8.0, 4.0})
            for (int i = 0; i <= 100; ++i)
                for (int j = 0; j <= 100; ++j) {
                    const Point z{-rho + 2 * rho * i / 100.0, -rho + 2 * rho * j / 100.0};
                    if (z.x * z.x + z.y * z.y > rho * rho) continue;
                    const double img = barrier_theta(a, z, rc).image;
                    if (a < 0)
                        EXPECT_LT(img, a / 4);
                    else
                        EXPECT_GT(img, a / 4);
                }
    }
}
