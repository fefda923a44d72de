#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sqzlink/analysis/welch.hpp"
#include "sqzlink/lock/controller.hpp"
#include "sqzlink/lock/cordic.hpp"
#include "sqzlink/lock/downmix.hpp"
#include "sqzlink/rng.hpp"

namespace {

void BM_CordicAtan2(benchmark::State& state) {
    sqz::Rng rng(1, 0);
    std::vector<std::int32_t> xs(4096), ys(4096);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        xs[k] = static_cast<std::int32_t>(rng.gaussian() * 2000.0);
        ys[k] = static_cast<std::int32_t>(rng.gaussian() * 2000.0) + 1;
    }
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            sqz::cordic_atan2(ys[k & 4095], xs[k & 4095], 16));
        ++k;
    }
}
BENCHMARK(BM_CordicAtan2);

void BM_DownmixerPush(benchmark::State& state) {
    sqz::DownmixerConfig cfg;
    cfg.pilot_frequency_hz = 40e6;
    cfg.input_rate_hz = 200e6;
    cfg.decimation = 20;
    sqz::Downmixer dm(cfg);
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dm.push(50.0 * std::cos(2.5e8 * t)));
        t += 5e-9;
    }
}
BENCHMARK(BM_DownmixerPush);

void BM_ControllerTick(benchmark::State& state) {
    sqz::LockControllerConfig cfg;
    sqz::LockController ctrl(cfg);
    sqz::IqSample s{1200, 40, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ctrl.tick(s));
        ++s.sample_index;
    }
}
BENCHMARK(BM_ControllerTick);

void BM_WelchPsd(benchmark::State& state) {
    sqz::Rng rng(7, 0);
    std::vector<double> x(1 << 18);
    for (auto& v : x) v = rng.gaussian();
    for (auto _ : state)
        benchmark::DoNotOptimize(sqz::welch_psd(x, 200e6, 16384));
}
BENCHMARK(BM_WelchPsd);

}  // namespace

BENCHMARK_MAIN();
