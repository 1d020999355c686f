// Serial reference against the OpenMP variant of each hot loop.
// Run with OMP_NUM_THREADS set to the core count of interest.

#include <random>

#include <benchmark/benchmark.h>

#include "hestonlab/discretization.hpp"
#include "hestonlab/kernels.hpp"
#include "hestonlab/lcp.hpp"
#include "hestonlab/montecarlo.hpp"

using namespace hestonlab;
using kernels::Exec;

namespace {

HestonParams put_params() { return {0.4, -0.5, 0.05, 0.0, 1.5, 0.04, 1.0}; }

DiscreteSystem put_system(std::size_t nx, std::size_t ny) {
    auto g = std::make_shared<const Grid>(-4.0, 1.0, 1.0, nx, ny, 0.9);
    return build_system(put_params(), g, SmoothedPutObstacle(1.0, 10.0 / static_cast<double>(nx - 1)),
                        ConstantObstacle(0.0));
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_Matvec(benchmark::State& state) {
    const auto sys = put_system(513, 257);
    std::vector<double> x(sys.size(), 1.0), y(sys.size());
    for (auto _ : state) {
        kernels::matvec(sys.matrix, x, y, exec_of(state));
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sys.matrix.nnz()));
}

void BM_PsorSweep(benchmark::State& state) {
    const auto sys = put_system(257, 129);
    const auto rows = sys.equation_rows();
    const auto colours = colour_rows(sys.matrix, rows);
    const auto psi = sample(SmoothedPutObstacle(1.0, 10.0 / 256.0), sys.grid);
    std::vector<double> u(psi.values().begin(), psi.values().end());
    for (auto _ : state) benchmark::DoNotOptimize(kernels::psor_sweep(sys.matrix, sys.rhs, psi.values(), colours, 1.5, u, exec_of(state)));
}

void BM_HolderAllPairs(benchmark::State& state) {
    kernels::PointSamples s;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        s.x.push_back(u(rng));
        s.y.push_back(u(rng));
        s.v.push_back(s.x.back() * s.y.back());
    }
    for (auto _ : state) benchmark::DoNotOptimize(kernels::holder_all_pairs(s, 0.5, exec_of(state)));
}

void BM_MonteCarlo(benchmark::State& state) {
    const auto sys = put_system(129, 65);
    auto psi = std::make_shared<const SmoothedPutObstacle>(1.0, 10.0 / 128.0);
    const auto ps = sample(*psi, sys.grid);
    const auto sol = solve_obstacle(sys, ps);
    auto reg = classify_regions(sol, ps, sol.tol_region);
    const StoppingRule rule(sol.u, std::move(reg.labels), psi);
    McOptions o;
    o.n_paths = 2000;
    o.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(stopped_value_streaming(put_params(), {-0.1, 0.3}, o, rule).mean);
}

}  // namespace

BENCHMARK(BM_Matvec)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_PsorSweep)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_HolderAllPairs)->ArgName("parallel")->Arg(0)->Arg(1);
BENCHMARK(BM_MonteCarlo)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
