#include <gtest/gtest.h>

#include <random>

#include "hestonlab/discretization.hpp"
#include "hestonlab/kernels.hpp"

using namespace hestonlab;
using kernels::Exec;

namespace {

DiscreteSystem put_system(std::size_t nx, std::size_t ny) {
    const HestonParams p(0.4, -0.5, 0.05, 0.0, 1.5, 0.04);
    auto g = std::make_shared<const Grid>(-4.0, 1.0, 1.0, nx, ny, 0.9);
    return build_system(p, g, SmoothedPutObstacle(1.0, 0.1), ConstantObstacle(0.0));
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(Kernels, MatvecSerialEqualsParallel) {
    const auto sys = put_system(129, 65);
    const auto x = noise(sys.size(), 1);
    std::vector<double> a(sys.size()), b(sys.size());
    kernels::matvec(sys.matrix, x, a, Exec::serial);
    kernels::matvec(sys.matrix, x, b, Exec::parallel);
    EXPECT_EQ(a, b);
    const auto want = multiply(sys.matrix, x);
    EXPECT_EQ(a, want);
}

TEST(Kernels, PsorSweepSerialEqualsParallel) {
    const auto sys = put_system(65, 33);
    const auto rows = sys.equation_rows();
    const auto colours = colour_rows(sys.matrix, rows);
    // rows of one colour never reference each other
    for (const auto& c : colours)
        for (std::size_t r : c)
            for (std::size_t s : c)
                if (r != s) EXPECT_EQ(sys.matrix.at(r, s), 0.0);
    const auto lower = noise(sys.size(), 2);
    auto ua = noise(sys.size(), 3), ub = ua;
    for (int sweep = 0; sweep < 5; ++sweep) {
        const double da = kernels::psor_sweep(sys.matrix, sys.rhs, lower, colours, 1.3, ua, Exec::serial);
        const double db = kernels::psor_sweep(sys.matrix, sys.rhs, lower, colours, 1.3, ub, Exec::parallel);
        EXPECT_EQ(da, db);
    }
    EXPECT_EQ(ua, ub);
    for (std::size_t k : rows) EXPECT_GE(ua[k], lower[k]);
}

TEST(Kernels, HolderSerialEqualsParallel) {
    kernels::PointSamples s;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 700; ++k) {
        s.x.push_back(u(rng));
        s.y.push_back(u(rng));
        s.v.push_back(std::sin(5 * s.x.back()) * s.y.back());
    }
    EXPECT_EQ(kernels::holder_all_pairs(s, 0.5, Exec::serial), kernels::holder_all_pairs(s, 0.5, Exec::parallel));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a + 3 < s.size(); a += 2) pairs.push_back({a, a + 3});
    const double ps = kernels::holder_pair_list(s, pairs, 0.5, Exec::serial);
    EXPECT_EQ(ps, kernels::holder_pair_list(s, pairs, 0.5, Exec::parallel));
    EXPECT_LE(ps, kernels::holder_all_pairs(s, 0.5, Exec::serial));
}

TEST(Kernels, ForEachIndexVisitsEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    kernels::for_each_index(hits.size(), [&](std::size_t k) { ++hits[k]; }, Exec::parallel);
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_GE(kernels::set_threads(0), 1);
}
