#include <benchmark/benchmark.h>

#include "rsctmc/discounted.hpp"
#include "rsctmc/finite_horizon.hpp"
#include "rsctmc/policy_iteration.hpp"
#include "rsctmc/simulate.hpp"
#include "../tests/test_support.hpp"

namespace tt = rsctmc::testing;
using namespace rsctmc;

static void BM_FiniteHorizonRk4(benchmark::State& state) {
    auto model = tt::desk_m2();
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto sol = solve_finite_horizon(model, 0.5, 2.0, steps);
        benchmark::DoNotOptimize(sol.grid.phi);
    }
    state.SetComplexityN(steps);
}
BENCHMARK(BM_FiniteHorizonRk4)->RangeMultiplier(2)->Range(500, 8000)->Complexity();

static void BM_PicardSolve(benchmark::State& state) {
    auto model = tt::desk_m2();
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto grid = picard_solve(model, 0.5, 2.0, steps);
        benchmark::DoNotOptimize(grid.phi);
    }
    state.SetComplexityN(steps);
}
BENCHMARK(BM_PicardSolve)->RangeMultiplier(2)->Range(500, 4000)->Complexity();

static void BM_DiscountedSolve(benchmark::State& state) {
    auto model = tt::desk_m2();
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto sol = solve_eps(model, 1.0, 1e-3, 0.9, steps);
        benchmark::DoNotOptimize(sol.W);
    }
    state.SetComplexityN(steps);
}
BENCHMARK(BM_DiscountedSolve)->RangeMultiplier(4)->Range(10000, 160000)->Complexity();

static void BM_PolicyEvaluation(benchmark::State& state) {
    auto model = tt::random_instance(static_cast<std::uint64_t>(state.range(0)));
    auto policy = tt::all_policies(model).front();
    for (auto _ : state) {
        auto eval = evaluate_policy(model, policy, 0.5);
        benchmark::DoNotOptimize(eval.rho);
    }
}
BENCHMARK(BM_PolicyEvaluation)->DenseRange(0, 4);

static void BM_PolicyIteration(benchmark::State& state) {
    auto model = tt::random_instance(static_cast<std::uint64_t>(state.range(0)));
    auto start = tt::all_policies(model).front();
    for (auto _ : state) {
        auto sol = policy_iteration(model, 0.5, start);
        benchmark::DoNotOptimize(sol.rho_star);
    }
}
BENCHMARK(BM_PolicyIteration)->DenseRange(0, 4);

static void BM_McFiniteCost(benchmark::State& state) {
    auto model = tt::desk_m2();
    MarkovPolicy policy;
    policy.times = {0.0, 2.0};
    policy.action = {{0, 0}, {0, 0}};
    const long n = state.range(0);
    for (auto _ : state) {
        auto est = mc_finite_cost(model, policy, 0.5, 2.0, 0, n, 7);
        benchmark::DoNotOptimize(est.mean);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_McFiniteCost)->RangeMultiplier(4)->Range(1000, 64000);

BENCHMARK_MAIN();
