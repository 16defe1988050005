#include <benchmark/benchmark.h>

#include "vdpo/exact/fixed_point.hpp"
#include "vdpo/exact/sample_complexity.hpp"

namespace {

using namespace vdpo;

void BM_BuildDelayedMdp(benchmark::State& state) {
    const auto m = mdp::random_mdp(0, 8, 3);
    const auto delay = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mdp::build_delayed_mdp(m, delay));
}
BENCHMARK(BM_BuildDelayedMdp)->DenseRange(1, 5);

void BM_ComputeBelief(benchmark::State& state) {
    const auto m = mdp::random_mdp(0, 16, 4);
    mdp::AugmentedState x{3, std::vector<mdp::ActionIndex>(static_cast<std::size_t>(state.range(0)), 1)};
    for (auto _ : state) benchmark::DoNotOptimize(mdp::compute_belief(m, x));
}
BENCHMARK(BM_ComputeBelief)->RangeMultiplier(2)->Range(1, 16);

void BM_ValueIterationDelayed(benchmark::State& state) {
    const auto m = mdp::random_mdp(1, 4, 2);
    const auto delayed = mdp::build_delayed_mdp(m, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(exact::value_iteration(delayed, 1e-10));
}
BENCHMARK(BM_ValueIterationDelayed)->DenseRange(1, 6);

void BM_ExactVdpo(benchmark::State& state) {
    const auto m = mdp::random_mdp(2, 4, 3);
    for (auto _ : state) benchmark::DoNotOptimize(exact::exact_vdpo(m, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_ExactVdpo)->DenseRange(1, 4);

void BM_SampleComplexityInstance(benchmark::State& state) {
    const auto m = mdp::random_mdp(0, 4, 2);
    for (auto _ : state) benchmark::DoNotOptimize(exact::sample_complexity_experiment(m, 3, 0.1, 0));
}
BENCHMARK(BM_SampleComplexityInstance)->Unit(benchmark::kMillisecond);

}  // namespace
