#include "vdpo/envs/point_mass.hpp"

#include <algorithm>
#include <cmath>

#include "vdpo/common/error.hpp"
#include "vdpo/common/rng.hpp"

namespace vdpo::envs {

PointMassTransition pointmass_step(const PointMassState& state, std::array<double, 2> force,
                                   std::array<double, 2> goal) {
    using namespace point_mass;
    for (int i = 0; i < 2; ++i) {
        if (!std::isfinite(state.position[i]) || !std::isfinite(state.velocity[i]) || !std::isfinite(force[i])) {
            throw NumericError("pointmass_step: non-finite input");
        }
    }
    PointMassTransition out;
    double dist2 = 0.0;
    double force2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double f = std::clamp(force[i], -kMaxForce, kMaxForce);
        const double d = state.position[i] - goal[i];
        dist2 += d * d;
        force2 += f * f;
        out.next.position[i] = state.position[i] + state.velocity[i] * kDt + 0.5 * f * kDt * kDt;
        out.next.velocity[i] = state.velocity[i] + f * kDt;
    }
    out.reward = -dist2 - kForceCost * force2;
    return out;
}

PointMassEnv::PointMassEnv(std::array<double, 2> goal) : goal_(goal) {
    spec_.state_dim = 4;
    spec_.action_dim = 2;
    spec_.action_low = {-point_mass::kMaxForce, -point_mass::kMaxForce};
    spec_.action_high = {point_mass::kMaxForce, point_mass::kMaxForce};
    spec_.max_episode_steps = point_mass::kEpisodeSteps;
}

std::vector<double> PointMassEnv::observation() const {
    return {state_.position[0], state_.position[1], state_.velocity[0], state_.velocity[1]};
}

std::vector<double> PointMassEnv::reset(std::uint64_t seed) {
    Rng rng(seed);
    state_.position = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    state_.velocity = {0.0, 0.0};
    steps_ = 0;
    done_ = false;
    return observation();
}

StepResult PointMassEnv::step(std::span<const double> action) {
    if (done_) throw ProtocolError("point_mass: step called on a finished episode");
    if (action.size() != 2) throw DimensionError("point_mass: action must have two entries");
    const auto tr = pointmass_step(state_, {action[0], action[1]}, goal_);
    state_ = tr.next;
    ++steps_;
    StepResult out;
    out.observation = observation();
    out.reward = tr.reward;
    out.truncated = steps_ >= spec_.max_episode_steps;
    done_ = out.truncated;
    return out;
}

}  // namespace vdpo::envs
