// Serial reference vs OpenMP seed-parallel execution of one suite slice.
// Both paths produce the same CSV; only wall time should differ.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "ctxchain/suite.hpp"

using namespace ctxchain;

namespace {

SuiteSpec noisy_slice(std::size_t seeds) {
    SuiteSpec suite = make_suite("main", seeds);
    std::erase_if(suite.conditions, [](const ScenarioConfig& c) { return c.regime != Regime::noisy; });
    return suite;
}

void BM_SuiteSerial(benchmark::State& state) {
    const auto suite = noisy_slice(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_suite_serial(suite));
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(suite.conditions.size()));
}

void BM_SuiteParallel(benchmark::State& state) {
    const auto suite = noisy_slice(static_cast<std::size_t>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(run_suite(suite, threads));
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(suite.conditions.size()));
}

void BM_SingleRun(benchmark::State& state) {
    ScenarioConfig cfg;
    cfg.n_nodes = static_cast<std::size_t>(state.range(0));
    cfg.variant = SyncVariant::make(SyncVariant::Kind::Both);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_one(cfg, seed++));
}

}  // namespace

BENCHMARK(BM_SuiteSerial)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SuiteParallel)
    ->ArgsProduct({{50}, benchmark::CreateRange(1, std::max(1, omp_get_num_procs()), 2)})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_SingleRun)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
