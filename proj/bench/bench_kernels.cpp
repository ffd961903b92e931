// Serial reference against the OpenMP path for the grid scan and batch runs.

#include <benchmark/benchmark.h>

#include <cmath>

#include "anmod/config.hpp"
#include "anmod/studies.hpp"

using namespace anmod;

namespace {

const RunConfig& qubit_resonator() {
    static const RunConfig cfg = load_config(std::filesystem::path(ANMOD_BENCH_CONFIG_DIR) / "qubit_resonator.ini");
    return cfg;
}

void grid_scan(benchmark::State& state, Execution execution) {
    const auto& cfg = qubit_resonator();
    const auto ev = make_backend(cfg);
    const auto x0 = cfg.problem.initial_point();
    const CostModel model(cfg.problem, x0, ev->evaluate(x0, kExactFidelity, 0));
    std::vector<double> lo, hi;
    for (const auto& v : cfg.problem.design_variables) {
        lo.push_back(v.lower_bound);
        hi.push_back(v.upper_bound);
    }
    const int points = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(grid_minimum(model, lo, hi, points, execution));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(std::pow(points, 5)));
}

void batch(benchmark::State& state, Execution execution) {
    const auto& cfg = qubit_resonator();
    const auto ev = make_backend(cfg);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(cfg, *ev, n, 1, execution));
    state.SetItemsProcessed(state.iterations() * n);
}

void noisy_batch(benchmark::State& state, Execution execution) {
    static const RunConfig cfg = load_config(std::filesystem::path(ANMOD_BENCH_CONFIG_DIR) / "qubit_resonator.ini",
                                             {"backend.noise=true", "backend.passes=4"});
    const auto ev = make_backend(cfg);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(cfg, *ev, n, 1, execution));
    state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK_CAPTURE(grid_scan, serial, Execution::serial)->Arg(9)->Arg(13)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(grid_scan, parallel, Execution::parallel)->Arg(9)->Arg(13)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(batch, serial, Execution::serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(batch, parallel, Execution::parallel)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(noisy_batch, serial, Execution::serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(noisy_batch, parallel, Execution::parallel)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
