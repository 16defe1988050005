#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "vdpo/common/error.hpp"
#include "vdpo/envs/delay_wrapper.hpp"
#include "vdpo/envs/pendulum.hpp"
#include "vdpo/envs/point_mass.hpp"

using namespace vdpo;
using namespace vdpo::envs;

namespace {

DelayedEnv delayed(const std::string& env, std::size_t delay, DelayMode mode = DelayMode::constant, double p = 0.9) {
    DelayConfig c;
    c.mode = mode;
    c.max_delay = delay;
    c.stochastic_prob_max = p;
    return DelayedEnv(make_env(env), c, 3);
}

}  // namespace

TEST(Pendulum, DynamicsMatchReferenceValues) {
    struct Case {
        PendulumState s;
        double u;
        double theta, theta_dot, reward;
    };
    const Case cases[] = {
        {{0.3, -0.5}, 1.2, 0.2950820077498002, -0.0983598450039953, -0.1164399999999999},
        {{3.0, 7.9}, 3.0, 3.4, 8.0, -15.245},
        {{-2.5, 1.0}, -0.7, -2.477692705403898, 0.4461458919220326, -6.35049},
    };
    for (const auto& c : cases) {
        const auto tr = pendulum_step(c.s, c.u);
        EXPECT_NEAR(tr.next.theta, c.theta, 1e-13);
        EXPECT_NEAR(tr.next.theta_dot, c.theta_dot, 1e-13);
        EXPECT_NEAR(tr.reward, c.reward, 1e-12);
    }
}

TEST(Pendulum, ObservationAndEpisodeLength) {
    PendulumEnv env;
    const auto obs = env.reset(4);
    ASSERT_EQ(obs.size(), 3u);
    EXPECT_NEAR(obs[0] * obs[0] + obs[1] * obs[1], 1.0, 1e-12);
    EXPECT_LE(std::abs(env.state().theta), std::numbers::pi);
    EXPECT_LE(std::abs(env.state().theta_dot), 1.0);
    const double u = 0.0;
    StepResult r;
    for (std::size_t t = 0; t < pendulum::kEpisodeSteps; ++t) r = env.step(std::span(&u, 1));
    EXPECT_TRUE(r.truncated);
    EXPECT_FALSE(r.terminated);
    EXPECT_THROW(env.step(std::span(&u, 1)), ProtocolError);
    EXPECT_EQ(PendulumEnv().reset(4), PendulumEnv().reset(4));
}

TEST(PointMass, DynamicsMatchReferenceValues) {
    PointMassState s{{0.5, -0.2}, {0.1, 0.3}};
    const auto tr = pointmass_step(s, {0.4, -1.0});
    EXPECT_NEAR(tr.next.position[0], 0.5055, 1e-15);
    EXPECT_NEAR(tr.next.position[1], -0.18625, 1e-15);
    EXPECT_NEAR(tr.next.velocity[0], 0.12, 1e-15);
    EXPECT_NEAR(tr.next.velocity[1], 0.25, 1e-15);
    EXPECT_NEAR(tr.reward, -0.3016, 1e-15);
}

TEST(Registry, KnownAndUnknownNames) {
    for (const auto& n : env_names()) EXPECT_EQ(make_env(n)->name(), n);
    EXPECT_THROW(make_env("cartpole"), ConfigError);
}

TEST(DelayedEnv, ConstantDelayShowsStateFromDeltaStepsAgo) {
    const std::size_t delay = 3;
    auto env = delayed("point_mass", delay);
    auto ref = make_env("point_mass");
    std::vector<std::vector<double>> states{ref->reset(11)};
    auto obs = env.reset(11);
    EXPECT_EQ(obs.delayed_state, states[0]);
    EXPECT_EQ(obs.action_buffer.size(), delay);
    for (int t = 1; t <= 10; ++t) {
        const std::vector<double> a{0.1 * t, -0.05 * t};
        states.push_back(ref->step(a).observation);
        obs = env.step(a).observation;
        const auto shown = static_cast<std::size_t>(std::max(0, t - static_cast<int>(delay)));
        EXPECT_EQ(obs.delayed_state, states[shown]) << "t " << t;
        ASSERT_EQ(obs.action_buffer.size(), delay);
        EXPECT_EQ(obs.action_buffer.back(), a);
        EXPECT_EQ(obs.flatten().size(), 4 + delay * 2);
    }
    EXPECT_EQ(env.invariant_violations(), 0u);
}

TEST(DelayedEnv, EarlyBufferIsPaddedWithFillAction) {
    DelayConfig c;
    c.max_delay = 2;
    c.initial_action_fill = {0.5};
    DelayedEnv env(make_env("pendulum"), c);
    auto obs = env.reset(0);
    EXPECT_EQ(obs.action_buffer, (std::vector<std::vector<double>>{{0.5}, {0.5}}));
    obs = env.step(std::vector<double>{1.0}).observation;
    EXPECT_EQ(obs.action_buffer, (std::vector<std::vector<double>>{{0.5}, {1.0}}));
    obs = env.step(std::vector<double>{-1.0}).observation;
    EXPECT_EQ(obs.action_buffer, (std::vector<std::vector<double>>{{1.0}, {-1.0}}));
}

TEST(DelayedEnv, ActionsAreClampedAndValidated) {
    auto env = delayed("pendulum", 1);
    env.reset(0);
    const auto obs = env.step(std::vector<double>{10.0}).observation;
    EXPECT_EQ(obs.action_buffer.back(), std::vector<double>{pendulum::kMaxTorque});
    EXPECT_THROW(env.step(std::vector<double>{std::nan("")}), NumericError);
    EXPECT_THROW(env.step(std::vector<double>{0.0, 0.0}), DimensionError);
}

TEST(DelayedEnv, StochasticDelayNeverExceedsBoundAndBuffersMatchLag) {
    auto env = delayed("point_mass", 4, DelayMode::stochastic, 0.5);
    for (std::uint64_t ep = 0; ep < 5; ++ep) {
        auto obs = env.reset(ep);
        std::int64_t prev = env.revealed_index();
        while (!env.done()) {
            obs = env.step(std::vector<double>{0.3, -0.3}).observation;
            EXPECT_LE(obs.freshness_lag, 4u);
            EXPECT_GE(env.revealed_index(), prev);
            prev = env.revealed_index();
        }
    }
    EXPECT_EQ(env.invariant_violations(), 0u);
    EXPECT_GT(env.full_delay_draws(), 0u);
    EXPECT_LT(env.full_delay_draws(), env.delay_draws());
}

TEST(DelayedEnv, ConfigValidation) {
    DelayConfig c;
    c.max_delay = 0;
    EXPECT_THROW(DelayedEnv(make_env("pendulum"), c), ConfigError);
    c.max_delay = 2;
    c.stochastic_prob_max = 1.5;
    EXPECT_THROW(DelayedEnv(make_env("pendulum"), c), ConfigError);
    c.stochastic_prob_max = 0.5;
    c.initial_action_fill = {0.0, 0.0};
    EXPECT_THROW(DelayedEnv(make_env("pendulum"), c), ConfigError);
    EXPECT_EQ(parse_delay_mode(to_string(DelayMode::stochastic)), DelayMode::stochastic);
    EXPECT_THROW(parse_delay_mode("sometimes"), ConfigError);
}

TEST(TrajectoryStore, RecordsRevealTimesAndPairs) {
    auto env = delayed("point_mass", 2);
    env.reset(1);
    for (int t = 0; t < 5; ++t) env.step(std::vector<double>{0.1, 0.2});
    const auto& ep = env.store().episodes().front();
    EXPECT_EQ(ep.reveal_times[0], 0);
    EXPECT_EQ(ep.reveal_times[1], 3);
    EXPECT_EQ(ep.reveal_times[3], 5);
    EXPECT_EQ(ep.reveal_times[4], TrajectoryStore::kUnrevealed);
    EXPECT_EQ(bc_pairs(env.store(), 2).size(), 2u);
    EXPECT_THROW(make_bc_pair(env.store(), 0, 1, 2), ProtocolError);
}

TEST(TrajectoryStore, BinaryRoundTripIsLossless) {
    auto env = delayed("pendulum", 3, DelayMode::stochastic);
    for (std::uint64_t ep = 0; ep < 2; ++ep) {
        env.reset(ep);
        while (!env.done()) env.step(std::vector<double>{0.7});
    }
    env.reset(9);
    for (int t = 0; t < 7; ++t) env.step(std::vector<double>{-0.2});
    const auto path = (std::filesystem::temp_directory_path() / "vdpo_traj_roundtrip.bin").string();
    env.store().save(path);
    const auto loaded = TrajectoryStore::load(path);
    EXPECT_TRUE(loaded == env.store());
    EXPECT_EQ(loaded.pair_positions(), env.store().pair_positions());
    EXPECT_EQ(loaded.total_steps(), env.store().total_steps());
    std::filesystem::resize_file(path, 40);
    EXPECT_THROW(TrajectoryStore::load(path), ProtocolError);
    std::filesystem::remove(path);
}
