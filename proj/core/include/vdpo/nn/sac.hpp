#pragma once

#include <vector>

#include "vdpo/nn/gaussian.hpp"
#include "vdpo/nn/replay_buffer.hpp"
#include "vdpo/nn/train_config.hpp"

namespace vdpo::nn {

/// Y = r + gamma * (1 - terminal) * (q_next - alpha * log_prob_next).
double soft_td_target(double reward, double gamma, bool terminal, double q_next, double alpha, double log_prob_next);

/// Q network over concatenated (observation, action).
struct Critic {
    Mlp net;

    Var forward(Tape& tape, Var obs, Var action, bool trainable = true) const;
    ParamList parameters() const { return net.parameters(); }
};

/// Independent copy of a critic's weights.
Critic clone_critic(const Critic& critic);

struct SacLosses {
    double critic = 0.0;
    double actor = 0.0;
    double alpha = 0.0;
};

/// Soft actor-critic with a target critic and learned temperature. With
/// `twin_critic` the clipped double-Q minimum is used in target and actor.
class SacAgent {
public:
    SacAgent(std::size_t obs_dim, ActionScale scale, const TrainConfig& config, Rng& init_rng);

    /// Soft TD targets with a single reparameterised next-action draw per row.
    Matrix td_targets(const Batch& batch, const Matrix& next_noise) const;
    /// Mean over critics of mean 0.5 (Q(s, a) - Y)^2, Y held constant.
    Var critic_loss(Tape& tape, const Batch& batch, const Matrix& targets) const;
    /// mean(alpha log pi(a~|s) - Q(s, a~)) with critics frozen. Writes log pi per row.
    Var actor_loss(Tape& tape, const Matrix& obs, const Matrix& noise, Eigen::VectorXd* log_probs = nullptr) const;
    /// -log_alpha.exp() * mean(log pi + target entropy).
    Var alpha_loss(Tape& tape, const Eigen::VectorXd& log_probs) const;

    double update_critic(const Batch& batch, Rng& rng, long long step);
    /// One actor step followed by one temperature step; returns (actor, alpha) losses.
    std::pair<double, double> update_actor(const Batch& batch, Rng& rng, long long step);
    void update_targets();

    /// The CleanRL-style schedule for one environment step after learning starts.
    SacLosses train_step(const ReplayBuffer& buffer, Rng& rng, long long step);

    double alpha() const;
    double target_entropy() const noexcept { return target_entropy_; }
    Matrix act(const Matrix& obs, Rng& rng, bool deterministic) const { return actor.act(obs, rng, deterministic); }

    /// Actor, critics, targets and log alpha, in a stable order.
    ParamList parameters() const;
    ParamList critic_parameters() const;

    const TrainConfig& config() const noexcept { return config_; }

    GaussianActor actor;
    std::vector<Critic> critics;
    std::vector<Critic> targets;
    ParamPtr log_alpha;

private:
    Var min_q(Tape& tape, const std::vector<Critic>& net, Var obs, Var action, bool trainable) const;

    TrainConfig config_;
    double target_entropy_;
    Adam actor_opt_;
    Adam critic_opt_;
    Adam alpha_opt_;
};

}  // namespace vdpo::nn
