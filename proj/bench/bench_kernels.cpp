// Serial versus OpenMP reordering kernels on the same block.

#include "dexcost/reorder_kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dexcost;

namespace {

PoolState bench_pool() {
    const auto [lo, hi] = full_range_ticks(10);
    const Position positions[] = {{lo, hi, Real(1'000'000)}, {-600, 600, Real(2'000'000)}};
    return new_pool(5, 10, 1, positions);
}

std::vector<ReplayItem> bench_items(std::size_t n) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> size(100, 20'000);
    std::vector<ReplayItem> items;
    for (std::size_t i = 0; i < n; ++i) {
        items.push_back(ReplayTrade{i % 2 ? Direction::one_for_zero : Direction::zero_for_one, Real(size(rng))});
    }
    return items;
}

void exact(benchmark::State& state, Execution execution) {
    const PoolState pool = bench_pool();
    const auto items = bench_items(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(expected_price_exact(pool, items, items.size() - 1, execution).mean);
    }
}

void sampled(benchmark::State& state, Execution execution) {
    const PoolState pool = bench_pool();
    const auto items = bench_items(12);
    const auto n_samples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(expected_price_sampled(pool, items, items.size() - 1, n_samples, 7, execution).mean);
    }
}

}  // namespace

BENCHMARK_CAPTURE(exact, serial, Execution::serial)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(exact, parallel, Execution::parallel)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sampled, serial, Execution::serial)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sampled, parallel, Execution::parallel)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
