#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vdpo::envs {

struct EnvSpec {
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::vector<double> action_low;
    std::vector<double> action_high;
    std::size_t max_episode_steps = 0;

    /// Throws ConfigError on empty dims or low >= high.
    void validate() const;
};

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;

    bool done() const noexcept { return terminated || truncated; }
};

/// Gym-style episodic environment over real vectors.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual const EnvSpec& spec() const = 0;
    /// Starts a new episode; the initial state depends only on `seed`.
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    /// Actions outside the bounds are clipped. Throws ProtocolError when the
    /// episode is over and NumericError on non-finite input.
    virtual StepResult step(std::span<const double> action) = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;
};

std::unique_ptr<Environment> make_env(const std::string& name);
std::vector<std::string> env_names();


}  // namespace vdpo::envs
