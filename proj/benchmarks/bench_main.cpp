#include <benchmark/benchmark.h>

#include <random>

#include "pigflow/cleanse.hpp"
#include "pigflow/features.hpp"
#include "pigflow/hydraulics.hpp"
#include "pigflow/pigtrack.hpp"
#include "pigflow/regressor.hpp"
#include "pigflow/series.hpp"

using namespace pigflow;

namespace {

PressureSeries noisy_series(std::size_t n, double rate_hz,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(40.0, 0.5);
    PressureSeries s;
    s.station = "A";
    s.nominal_rate_hz = rate_hz;
    const auto step = static_cast<Timestamp>(1e6 / rate_hz);
    for (std::size_t i = 0; i < n; ++i) {
        s.timestamps_us.push_back(static_cast<Timestamp>(i) * step);
        s.values.push_back(g(rng));
    }
    return s;
}

UniformSeries noisy_uniform(std::size_t n, std::uint64_t seed,
                            double gap_fraction = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.2, 0.02);
    std::uniform_real_distribution<double> gap(0.0, 1.0);
    UniformSeries u;
    u.step_us = 60 * kMicrosPerSecond;
    u.values.resize(n);
    for (auto& v : u.values)
        v = gap(rng) < gap_fraction ? kMissing : g(rng);
    return u;
}

void bm_resample(benchmark::State& state) {
    const PressureSeries s =
        noisy_series(static_cast<std::size_t>(state.range(0)), 20.0, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(resample_uniform(s, 60.0, Reducer::Mean));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_resample)->Arg(1 << 16)->Arg(1 << 20);

void bm_moving_average(benchmark::State& state) {
    const UniformSeries u =
        noisy_uniform(static_cast<std::size_t>(state.range(0)), 2, 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(moving_average(u));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_moving_average)->Arg(1 << 16)->Arg(1 << 20);

void bm_rolling_features(benchmark::State& state) {
    const UniformSeries u =
        noisy_uniform(static_cast<std::size_t>(state.range(0)), 3, 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(rolling_features(u));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_rolling_features)->Arg(1 << 16)->Arg(1 << 19);

void bm_windowed_xcorr(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(state.range(0)));
    std::vector<double> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = g(rng);
        b[i] = g(rng);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(windowed_xcorr(a, b, 240));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_windowed_xcorr)->Arg(1 << 10)->Arg(1 << 13);

void bm_gmm_fit(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<StateFeatureRow> rows;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 3);
        const double mean = c == 0 ? 1.0 : c == 1 ? 30.0 : 45.0;
        const double sd = c == 1 ? 3.0 : 0.2;
        rows.push_back({static_cast<Timestamp>(i), mean + g(rng),
                        sd + 0.05 * std::abs(g(rng))});
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_gmm(rows, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_gmm_fit)->Arg(1 << 12)->Arg(1 << 15);

void bm_fit_tree(benchmark::State& state) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> v(0.0, 1.0);
    Dataset d;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kFeatureCount> x{};
        const double h = v(rng);
        for (auto& f : x) f = h + 0.05 * v(rng);
        d.x.push_back(x);
        d.y.push_back(h);
        d.t_us.push_back(static_cast<Timestamp>(i));
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_tree(d, TrainConfig{}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_fit_tree)->Arg(1 << 14)->Arg(1 << 17);

} // namespace

BENCHMARK_MAIN();
