#include <benchmark/benchmark.h>

#include "vdpo/envs/delay_wrapper.hpp"
#include "vdpo/nn/delayed_policy.hpp"
#include "vdpo/nn/sac.hpp"

namespace {

using namespace vdpo;

nn::ActionScale pendulum_scale() { return nn::ActionScale::from_bounds({-2.0}, {2.0}); }

nn::ReplayBuffer filled_buffer(std::size_t obs_dim, Rng& rng) {
    nn::ReplayBuffer buf(5000, obs_dim, 1);
    std::vector<double> s(obs_dim), s2(obs_dim);
    for (int i = 0; i < 5000; ++i) {
        for (auto& v : s) v = rng.normal();
        for (auto& v : s2) v = rng.normal();
        const double a = rng.uniform(-2.0, 2.0);
        buf.add(s, std::span<const double>(&a, 1), rng.normal(), s2, false);
    }
    return buf;
}

void BM_SacTrainStep(benchmark::State& state) {
    nn::TrainConfig cfg;
    cfg.hidden = {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
    Rng rng(0);
    nn::SacAgent agent(3, pendulum_scale(), cfg, rng);
    const auto buf = filled_buffer(3, rng);
    long long step = 0;
    for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(buf, rng, ++step));
}
BENCHMARK(BM_SacTrainStep)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

nn::BcBatch random_bc_batch(std::size_t batch, std::size_t delay, Rng& rng) {
    nn::BcBatch b;
    b.size = batch;
    b.tokens = nn::standard_normal(static_cast<Eigen::Index>(batch * delay), 4, rng);
    b.targets = nn::standard_normal(static_cast<Eigen::Index>(batch * delay), 3, rng);
    return b;
}

void BM_BeliefUpdate(benchmark::State& state) {
    nn::TrainConfig cfg;
    Rng rng(0);
    const auto delay = static_cast<std::size_t>(state.range(0));
    nn::DelayedLearner learner(3, pendulum_scale(), delay, cfg, rng);
    const auto batch = random_bc_batch(cfg.bc_batch_size, delay, rng);
    for (auto _ : state) benchmark::DoNotOptimize(learner.update_belief(batch, rng, 0));
}
BENCHMARK(BM_BeliefUpdate)->Arg(1)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_DelayedAct(benchmark::State& state) {
    nn::TrainConfig cfg;
    Rng rng(0);
    const std::size_t delay = 2;
    nn::DelayedLearner learner(3, pendulum_scale(), delay, cfg, rng);
    envs::AugmentedObservation x{{0.1, 0.2, 0.3}, {{0.5}, {-0.5}}, delay};
    for (auto _ : state) benchmark::DoNotOptimize(learner.act(x, rng, true));
}
BENCHMARK(BM_DelayedAct)->Unit(benchmark::kMicrosecond);

void BM_DelayedEnvStep(benchmark::State& state) {
    envs::DelayConfig cfg;
    cfg.mode = envs::DelayMode::stochastic;
    cfg.max_delay = 5;
    envs::DelayedEnv env(envs::make_env("pendulum"), cfg, 0);
    env.reset(0);
    std::uint64_t ep = 1;
    const double a = 0.5;
    for (auto _ : state) {
        if (env.step(std::span<const double>(&a, 1)).done) env.reset(ep++);
    }
}
BENCHMARK(BM_DelayedEnvStep);

}  // namespace
