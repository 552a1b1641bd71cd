#include <benchmark/benchmark.h>

#include "qus/imaging.hpp"
#include "qus/nakagami.hpp"
#include "qus/special.hpp"
#include "qus/window_estimators.hpp"

namespace {

qus::EnvelopeImage image(std::size_t side) {
    return qus::EnvelopeImage(side, side, qus::sample({1.2, 1.0}, side * side, 1));
}

void BM_Digamma(benchmark::State& state) {
    double x = 0.37;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qus::digamma(x));
        x = x < 40 ? x * 1.01 : 0.37;
    }
}
BENCHMARK(BM_Digamma);

void BM_MleExactWindow(benchmark::State& state) {
    const auto w = qus::sample({1.5, 1.0}, 81, 2);
    for (auto _ : state) benchmark::DoNotOptimize(qus::mle_exact(w));
}
BENCHMARK(BM_MleExactWindow);

void BM_SlidingMap(benchmark::State& state) {
    const auto img = image(static_cast<std::size_t>(state.range(0)));
    const auto est = static_cast<qus::Estimator>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(qus::sliding_map(img, {9, 1}, est));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_SlidingMap)->ArgsProduct({{64, 256}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_Wmc(benchmark::State& state) {
    const auto img = image(128);
    for (auto _ : state) benchmark::DoNotOptimize(qus::wmc_map(img, {{9, 1}, {11, 1}, {13, 1}}));
}
BENCHMARK(BM_Wmc)->Unit(benchmark::kMillisecond);

void BM_MedianFilter(benchmark::State& state) {
    const auto m = qus::sliding_map(image(128), {9, 1}, qus::Estimator::Moment);
    for (auto _ : state) benchmark::DoNotOptimize(qus::imaging::low_pass(m, qus::imaging::FilterKind::Median, 7));
}
BENCHMARK(BM_MedianFilter)->Unit(benchmark::kMillisecond);

}  // namespace
