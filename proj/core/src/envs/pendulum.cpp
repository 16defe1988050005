#include "vdpo/envs/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vdpo/common/error.hpp"
#include "vdpo/common/rng.hpp"

namespace vdpo::envs {

namespace {
constexpr double kPi = std::numbers::pi;
}

double angle_normalize(double theta) {
    const double wrapped = std::fmod(theta + kPi, 2.0 * kPi);
    return (wrapped < 0.0 ? wrapped + 2.0 * kPi : wrapped) - kPi;
}

PendulumTransition pendulum_step(PendulumState state, double torque) {
    using namespace pendulum;
    if (!std::isfinite(state.theta) || !std::isfinite(state.theta_dot) || !std::isfinite(torque)) {
        throw NumericError("pendulum_step: non-finite input");
    }
    const double u = std::clamp(torque, -kMaxTorque, kMaxTorque);
    const double th = angle_normalize(state.theta);
    const double reward = -(th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u);

    const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(state.theta) + 3.0 / (kMass * kLength * kLength) * u;
    const double theta_dot = std::clamp(state.theta_dot + accel * kDt, -kMaxSpeed, kMaxSpeed);
    return {{state.theta + theta_dot * kDt, theta_dot}, reward};
}

std::array<double, 3> pendulum_observation(PendulumState state) {
    return {std::cos(state.theta), std::sin(state.theta), state.theta_dot};
}

double pendulum_energy(PendulumState state) {
    using namespace pendulum;
    return kMass * kLength * kLength * state.theta_dot * state.theta_dot / 6.0 +
           0.5 * kMass * kGravity * kLength * std::cos(state.theta);
}

PendulumEnv::PendulumEnv() {
    spec_.state_dim = 3;
    spec_.action_dim = 1;
    spec_.action_low = {-pendulum::kMaxTorque};
    spec_.action_high = {pendulum::kMaxTorque};
    spec_.max_episode_steps = pendulum::kEpisodeSteps;
}

std::vector<double> PendulumEnv::reset(std::uint64_t seed) {
    Rng rng(seed);
    state_.theta = rng.uniform(-kPi, kPi);
    state_.theta_dot = rng.uniform(-1.0, 1.0);
    steps_ = 0;
    done_ = false;
    const auto obs = pendulum_observation(state_);
    return {obs.begin(), obs.end()};
}

StepResult PendulumEnv::step(std::span<const double> action) {
    if (done_) throw ProtocolError("pendulum: step called on a finished episode");
    if (action.size() != 1) throw DimensionError("pendulum: action must have one entry");
    const auto tr = pendulum_step(state_, action[0]);
    state_ = tr.next;
    ++steps_;
    StepResult out;
    const auto obs = pendulum_observation(state_);
    out.observation.assign(obs.begin(), obs.end());
    out.reward = tr.reward;
    out.truncated = steps_ >= spec_.max_episode_steps;
    done_ = out.truncated;
    return out;
}

}  // namespace vdpo::envs
