#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "vdpo/common/rng.hpp"
#include "vdpo/envs/environment.hpp"
#include "vdpo/envs/trajectory_store.hpp"

namespace vdpo::envs {

enum class DelayMode { constant, stochastic };

DelayMode parse_delay_mode(const std::string& text);
std::string to_string(DelayMode mode);

struct DelayConfig {
    DelayMode mode = DelayMode::constant;
    std::size_t max_delay = 1;
    /// Probability that a stochastic step samples the full delay.
    double stochastic_prob_max = 0.9;
    /// Fill action for the virtual pre-episode history; zeros when empty.
    std::vector<double> initial_action_fill;

    void validate(std::size_t action_dim) const;
};

struct DelayedStepResult {
    AugmentedObservation observation;
    /// True instantaneous reward r_t of the step just taken.
    double reward = 0.0;
    bool done = false;
    bool terminated = false;
};

/// Observation-delay wrapper.
///
/// At step t the agent sees s_{m_t} with m_t = max(m_{t-1}, t - delta_t), so
/// revealed information is monotone. Before the episode starts the history is
/// virtual: s_k = s_0 and a_k = fill for k < 0, which gives x_0 = (s_0, fill).
/// Constant mode uses delta_t = Delta. Stochastic mode samples delta_t = Delta
/// with probability `stochastic_prob_max` and otherwise uniformly from
/// {1, ..., Delta-1} (always Delta when Delta = 1).
class DelayedEnv {
public:
    DelayedEnv(std::unique_ptr<Environment> env, DelayConfig config, std::uint64_t delay_seed = 0);

    const EnvSpec& spec() const { return env_->spec(); }
    const DelayConfig& config() const noexcept { return config_; }
    Environment& inner() noexcept { return *env_; }

    AugmentedObservation reset(std::uint64_t seed);
    DelayedStepResult step(std::span<const double> action);

    std::size_t t() const noexcept { return t_; }
    /// Index of the freshest revealed state (negative before s_0 is reached).
    std::int64_t revealed_index() const noexcept { return revealed_; }
    bool done() const noexcept { return done_; }

    /// Number of steps whose sampled delay equalled max_delay.
    std::uint64_t full_delay_draws() const noexcept { return full_delay_draws_; }
    std::uint64_t delay_draws() const noexcept { return delay_draws_; }
    /// Number of times an emitted observation broke monotone information or
    /// showed a state before its reveal step. Zero unless the wrapper is broken.
    std::uint64_t invariant_violations() const noexcept { return violations_; }

    const TrajectoryStore& store() const noexcept { return store_; }
    TrajectoryStore& store() noexcept { return store_; }

private:
    AugmentedObservation observe();
    std::size_t sample_delay();

    std::unique_ptr<Environment> env_;
    DelayConfig config_;
    Rng delay_rng_;
    TrajectoryStore store_;
    std::size_t episode_ = 0;
    std::size_t t_ = 0;
    std::int64_t revealed_ = 0;
    bool done_ = true;
    std::uint64_t full_delay_draws_ = 0;
    std::uint64_t delay_draws_ = 0;
    std::uint64_t violations_ = 0;
};

}  // namespace vdpo::envs
