// Serial reference kernels against their OpenMP counterparts.
// Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tideh/kernels.hpp"
#include "tideh/prediction.hpp"
#include "tideh/simulator.hpp"

using namespace tideh;

namespace {

const InfectiousRateParams kRate{0.001, 0.424, days(0.125), days(2.0)};

std::vector<Event> synthetic_events(std::size_t n, double span) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> t(0.0, span);
    std::lognormal_distribution<double> d(std::log(150.0), 1.4);
    std::vector<Event> ev(n);
    for (auto& e : ev) e = {t(rng), static_cast<std::int64_t>(d(rng))};
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
    ev.front().time = 0.0;
    return ev;
}

std::vector<double> grid_times(double T, double T_max, double step) {
    return ForecastGrid{T, T_max, step}.times();
}

template <auto Kernel>
void observed_memory(benchmark::State& state) {
    const auto events = synthetic_events(static_cast<std::size_t>(state.range(0)), hours(6));
    const auto times = grid_times(hours(6), hours(168), 360.0);
    const KernelParams k;
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(events, times, k));
    state.SetItemsProcessed(state.iterations() * state.range(0) *
                            static_cast<std::int64_t>(times.size()));
}

struct VolterraInput {
    std::vector<double> drive, rate, lags;
    double step;
};

VolterraInput volterra_input(std::size_t nodes) {
    const double T = hours(6), step = 360.0;
    const KernelParams k;
    VolterraInput in;
    in.step = step;
    in.lags = kernels::kernel_lag_table(nodes, step, k);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = T + static_cast<double>(i) * step;
        in.rate.push_back(infectious_rate(t, kRate));
        in.drive.push_back(infectious_rate(t, kRate) * 1e5 * memory_kernel(t, k));
    }
    return in;
}

template <auto Kernel>
void volterra(benchmark::State& state) {
    const auto in = volterra_input(static_cast<std::size_t>(state.range(0)));
    const kernels::VolterraSystem sys{in.drive, in.rate, in.lags, 400.0, in.step};
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(sys));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) / 2);
}

template <auto Batch>
void simulation_batch(benchmark::State& state) {
    const auto fs = FollowerSampler::constant(150);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            Batch(static_cast<std::size_t>(state.range(0)), kRate, KernelParams{}, 100000, fs,
                  hours(48), 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(observed_memory<kernels::observed_memory_serial>)->Name("observed_memory/serial")->UseRealTime()->Arg(100)->Arg(2000);
BENCHMARK(observed_memory<kernels::observed_memory>)->Name("observed_memory/omp")->UseRealTime()->Arg(100)->Arg(2000);
BENCHMARK(volterra<kernels::volterra_trapezoid_serial>)->Name("volterra/serial")->UseRealTime()->Arg(1621)->Arg(6481);
BENCHMARK(volterra<kernels::volterra_trapezoid>)->Name("volterra/omp")->UseRealTime()->Arg(1621)->Arg(6481);
BENCHMARK(simulation_batch<simulate_batch_serial>)->Name("simulate_batch/serial")->UseRealTime()->Arg(16);
BENCHMARK(simulation_batch<simulate_batch>)->Name("simulate_batch/omp")->UseRealTime()->Arg(16);

BENCHMARK_MAIN();
