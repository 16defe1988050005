#include <cmath>

#include "vdpo/common/error.hpp"
#include "vdpo/envs/environment.hpp"
#include "vdpo/envs/pendulum.hpp"
#include "vdpo/envs/point_mass.hpp"

namespace vdpo::envs {

void EnvSpec::validate() const {
    if (state_dim == 0 || action_dim == 0) throw ConfigError("EnvSpec: dimensions must be at least 1");
    if (action_low.size() != action_dim || action_high.size() != action_dim) {
        throw ConfigError("EnvSpec: action bounds must have action_dim entries");
    }
    for (std::size_t i = 0; i < action_dim; ++i) {
        if (!(action_low[i] < action_high[i])) throw ConfigError("EnvSpec: action_low must be below action_high");
    }
    if (max_episode_steps == 0) throw ConfigError("EnvSpec: max_episode_steps must be positive");
}

std::unique_ptr<Environment> make_env(const std::string& name) {
    if (name == "pendulum") return std::make_unique<PendulumEnv>();
    if (name == "point_mass") return std::make_unique<PointMassEnv>();
    throw ConfigError("unknown environment '" + name + "'");
}

std::vector<std::string> env_names() { return {"pendulum", "point_mass"}; }

}  // namespace vdpo::envs
