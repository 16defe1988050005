#pragma once

#include <array>

#include "vdpo/envs/environment.hpp"

namespace vdpo::envs {

namespace point_mass {
inline constexpr double kDt = 0.05;
inline constexpr double kMaxForce = 1.0;
inline constexpr double kForceCost = 0.01;
inline constexpr std::size_t kEpisodeSteps = 100;
}  // namespace point_mass

/// Unit mass in the plane.
struct PointMassState {
    std::array<double, 2> position{};
    std::array<double, 2> velocity{};
};

struct PointMassTransition {
    PointMassState next;
    double reward = 0.0;
};

/// Exact double-integrator update under constant force over one step:
/// p' = p + v dt + F dt^2 / 2, v' = v + F dt.
/// Reward -||p - goal||^2 - 0.01 ||F||^2 at the pre-step state.
PointMassTransition pointmass_step(const PointMassState& state, std::array<double, 2> force,
                                   std::array<double, 2> goal = {0.0, 0.0});

class PointMassEnv final : public Environment {
public:
    explicit PointMassEnv(std::array<double, 2> goal = {0.0, 0.0});

    std::string name() const override { return "point_mass"; }
    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(std::uint64_t seed) override;
    StepResult step(std::span<const double> action) override;
    std::unique_ptr<Environment> clone() const override { return std::make_unique<PointMassEnv>(*this); }

    const PointMassState& state() const noexcept { return state_; }
    void set_state(const PointMassState& s) { state_ = s; }

private:
    std::vector<double> observation() const;

    EnvSpec spec_;
    std::array<double, 2> goal_;
    PointMassState state_;
    std::size_t steps_ = 0;
    bool done_ = true;
};

}  // namespace vdpo::envs
