#include <benchmark/benchmark.h>

#include "qus/ardae.hpp"
#include "qus/kernel_score.hpp"
#include "qus/nakagami.hpp"
#include "qus/network.hpp"

namespace {

void BM_Forward(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const qus::EnvelopeImage img(side, side, qus::sample({1.0, 1.0}, side * side, 3));
    const auto model = qus::score::ScoreModel::initialized(qus::score::Architecture::compact(), 1);
    for (auto _ : state) benchmark::DoNotOptimize(qus::score::forward(model, img));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_LossAndGradient(benchmark::State& state) {
    const auto model = qus::score::ScoreModel::initialized(qus::score::Architecture::compact(), 1);
    qus::Rng rng(4);
    std::vector<qus::Grid<double>> clean, noise;
    for (int i = 0; i < 8; ++i) {
        clean.emplace_back(32, 32, qus::sample({1.0, 1.0}, 1024, rng));
        qus::Grid<double> u(32, 32);
        for (double& v : u.values()) v = rng.normal();
        noise.push_back(std::move(u));
    }
    std::vector<qus::score::DenoisingSample> batch;
    for (int i = 0; i < 8; ++i) batch.push_back({&clean[i], &noise[i], 0.05});
    qus::score::Workspace ws;
    for (auto _ : state) benchmark::DoNotOptimize(qus::score::ardae_loss(model, batch, {}, ws));
}
BENCHMARK(BM_LossAndGradient)->Unit(benchmark::kMillisecond);

void BM_KernelScore(benchmark::State& state) {
    const auto s = qus::sample({1.0, 1.0}, static_cast<std::size_t>(state.range(0)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(qus::score::kernel_score(s, s));
}
BENCHMARK(BM_KernelScore)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
