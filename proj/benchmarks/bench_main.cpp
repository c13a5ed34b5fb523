#include <benchmark/benchmark.h>

#include "rlao/abstraction.hpp"
#include "rlao/dependence.hpp"
#include "rlao/experiments.hpp"
#include "rlao/mdp.hpp"
#include "rlao/rmax.hpp"

namespace {

using namespace rlao;

void BM_ValueFinite(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const auto m = random_mdp(n, 4, 1.0, 17);
    for (auto _ : state) benchmark::DoNotOptimize(solve_finite(m, 50));
    state.SetComplexityN(n);
}
BENCHMARK(BM_ValueFinite)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_ValueDiscounted(benchmark::State& state) {
    const auto m = random_mdp(static_cast<int>(state.range(0)), 4, 1.0, 17);
    for (auto _ : state) benchmark::DoNotOptimize(value_discounted(m, 0.95, kOptimal, 1e-9));
}
BENCHMARK(BM_ValueDiscounted)->Arg(16)->Arg(64)->Arg(256);

void BM_TrajectoryEnumeration(benchmark::State& state) {
    const auto m = random_mdp(4, 1, 1.0, 5);
    const auto pi = Policy::constant(4, 0);
    const auto h = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(trajectory_distribution(m, 0, pi, h));
}
BENCHMARK(BM_TrajectoryEnumeration)->DenseRange(4, 8, 2);

void BM_DependenceReport(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const auto [m, phi] = generate_benchmark({4, std::vector<int>(4, n / 4), 2, 0.1, 0.0, 1.0, 3});
    const auto behavior = AbstractBehavior::uniform(4, 2);
    for (auto _ : state) benchmark::DoNotOptimize(dependence_report(m, phi, 0, {0, 0}, behavior));
}
BENCHMARK(BM_DependenceReport)->Arg(8)->Arg(32)->Arg(128);

void BM_MartingaleResiduals(benchmark::State& state) {
    const auto [m, phi] = counterexample_fixture();
    const std::vector<double> z{1.0, -1.0, 1.0};
    const auto depth = static_cast<int>(state.range(0));
    const auto behavior = AbstractBehavior::constant(3, 1, 0);
    for (auto _ : state) benchmark::DoNotOptimize(martingale_residuals(m, phi, 0, {0, 0}, z, depth, behavior));
}
BENCHMARK(BM_MartingaleResiduals)->DenseRange(2, 8, 2);

void BM_RMaxRun(benchmark::State& state) {
    const auto [m, phi] = generate_benchmark({4, {3, 3, 3, 3}, 2, 0.05, 0.0, 1.0, 2024});
    RMaxConfig cfg;
    cfg.t_eps = 2;
    cfg.m_known = static_cast<int>(state.range(0));
    cfg.seed = 11;
    for (auto _ : state) benchmark::DoNotOptimize(rmax_run(m, phi, cfg));
}
BENCHMARK(BM_RMaxRun)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
