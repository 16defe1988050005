#pragma once

#include <array>

#include "vdpo/envs/environment.hpp"

namespace vdpo::envs {

/// Classic swing-up pendulum. theta = 0 is upright.
namespace pendulum {
inline constexpr double kMass = 1.0;
inline constexpr double kLength = 1.0;
inline constexpr double kGravity = 10.0;
inline constexpr double kDt = 0.05;
inline constexpr double kMaxSpeed = 8.0;
inline constexpr double kMaxTorque = 2.0;
inline constexpr std::size_t kEpisodeSteps = 200;
}  // namespace pendulum

struct PendulumState {
    double theta = 0.0;
    double theta_dot = 0.0;
};

struct PendulumTransition {
    PendulumState next;
    double reward = 0.0;
};

/// Wraps an angle to [-pi, pi).
double angle_normalize(double theta);

/// theta_ddot = 3g/(2l) sin(theta) + 3/(m l^2) u, semi-implicit Euler with the
/// angular velocity clipped to +-8. Reward is evaluated at the pre-step state.
PendulumTransition pendulum_step(PendulumState state, double torque);

std::array<double, 3> pendulum_observation(PendulumState state);

/// Mechanical energy per unit mass of the undamped rod (for integrator checks).
double pendulum_energy(PendulumState state);

class PendulumEnv final : public Environment {
public:
    PendulumEnv();

    std::string name() const override { return "pendulum"; }
    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(std::uint64_t seed) override;
    StepResult step(std::span<const double> action) override;
    std::unique_ptr<Environment> clone() const override { return std::make_unique<PendulumEnv>(*this); }

    PendulumState state() const noexcept { return state_; }
    void set_state(PendulumState s) { state_ = s; }

private:
    EnvSpec spec_;
    PendulumState state_;
    std::size_t steps_ = 0;
    bool done_ = true;
};

}  // namespace vdpo::envs
