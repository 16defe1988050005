#include "vdpo/nn/sac.hpp"

#include <cmath>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

double soft_td_target(double reward, double gamma, bool terminal, double q_next, double alpha, double log_prob_next) {
    if (terminal) return reward;
    return reward + gamma * (q_next - alpha * log_prob_next);
}

Var Critic::forward(Tape& tape, Var obs, Var action, bool trainable) const {
    return net.forward(tape, concat_cols({obs, action}), trainable);
}

Critic clone_critic(const Critic& critic) {
    Critic out = critic;
    for (auto& layer : out.net.layers) {
        layer.weight = std::make_shared<Parameter>(layer.weight->name, layer.weight->value);
        layer.bias = std::make_shared<Parameter>(layer.bias->name, layer.bias->value);
    }
    return out;
}

namespace {

std::vector<Eigen::Index> to_index(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

void check_finite(double loss, const char* what, long long step) {
    if (!std::isfinite(loss)) throw TrainingAborted(std::string("non-finite ") + what + " loss", step);
}

}  // namespace

SacAgent::SacAgent(std::size_t obs_dim, ActionScale scale, const TrainConfig& config, Rng& init_rng)
    : config_(config),
      target_entropy_(config.resolved_target_entropy(static_cast<std::size_t>(scale.dim()))),
      actor_opt_(AdamConfig{config.actor_lr}),
      critic_opt_(AdamConfig{config.critic_lr}),
      alpha_opt_(AdamConfig{config.alpha_lr}) {
    config_.validate();
    const auto hidden = to_index(config.hidden);
    const auto obs = static_cast<Eigen::Index>(obs_dim);
    const Eigen::Index act = scale.dim();
    actor = GaussianActor("actor", obs, act, hidden, std::move(scale), init_rng);
    const std::size_t n = config.twin_critic ? 2 : 1;
    for (std::size_t i = 0; i < n; ++i) {
        critics.push_back(Critic{Mlp("critic" + std::to_string(i), obs + act, hidden, 1, init_rng)});
        targets.push_back(clone_critic(critics.back()));
        for (auto& layer : targets.back().net.layers) {
            layer.weight->name = "target_" + layer.weight->name;
            layer.bias->name = "target_" + layer.bias->name;
        }
    }
    log_alpha = constant_param("log_alpha", 1, 1, std::log(config.initial_alpha));
}

double SacAgent::alpha() const { return std::exp(log_alpha->value(0, 0)); }

Var SacAgent::min_q(Tape& tape, const std::vector<Critic>& net, Var obs, Var action, bool trainable) const {
    Var q = net.front().forward(tape, obs, action, trainable);
    for (std::size_t i = 1; i < net.size(); ++i) q = minimum(q, net[i].forward(tape, obs, action, trainable));
    return q;
}

Matrix SacAgent::td_targets(const Batch& batch, const Matrix& next_noise) const {
    Tape tape;
    Var next = tape.constant(batch.next_obs);
    const auto head = actor.head(tape, next, false);
    const auto sample = sample_squashed(tape, head, next_noise, actor.scale);
    const Matrix q_next = min_q(tape, targets, next, sample.action, false).value();
    const Matrix& logp = sample.log_prob.value();
    const double a = alpha();
    Matrix y(batch.rewards.rows(), 1);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        y(i, 0) = soft_td_target(batch.rewards(i, 0), config_.gamma, batch.terminals(i, 0) > 0.5, q_next(i, 0), a, logp(i, 0));
    }
    return y;
}

Var SacAgent::critic_loss(Tape& tape, const Batch& batch, const Matrix& targets_y) const {
    Var obs = tape.constant(batch.obs);
    Var act = tape.constant(batch.actions);
    Var y = tape.constant(targets_y);
    Var total;
    for (std::size_t i = 0; i < critics.size(); ++i) {
        Var l = scale(mean(square(sub(critics[i].forward(tape, obs, act, true), y))), 0.5);
        total = i == 0 ? l : add(total, l);
    }
    return critics.size() == 1 ? total : scale(total, 1.0 / static_cast<double>(critics.size()));
}

Var SacAgent::actor_loss(Tape& tape, const Matrix& obs_m, const Matrix& noise, Eigen::VectorXd* log_probs) const {
    Var obs = tape.constant(obs_m);
    const auto head = actor.head(tape, obs, true);
    const auto sample = sample_squashed(tape, head, noise, actor.scale);
    Var q = min_q(tape, critics, obs, sample.action, false);
    if (log_probs) *log_probs = sample.log_prob.value().col(0);
    return mean(sub(scale(sample.log_prob, alpha()), q));
}

Var SacAgent::alpha_loss(Tape& tape, const Eigen::VectorXd& log_probs) const {
    Var la = tape.parameter(log_alpha, true);
    Matrix shifted = (log_probs.array() + target_entropy_).matrix();
    return scale(mean(mul_scalar(tape.constant(shifted), exp(la))), -1.0);
}

double SacAgent::update_critic(const Batch& batch, Rng& rng, long long step) {
    const Matrix y = td_targets(batch, standard_normal(batch.obs.rows(), actor.action_dim(), rng));
    const auto params = critic_parameters();
    zero_grad(params);
    Tape tape;
    Var loss = critic_loss(tape, batch, y);
    check_finite(loss.scalar(), "critic", step);
    tape.backward(loss);
    critic_opt_.step(params);
    return loss.scalar();
}

std::pair<double, double> SacAgent::update_actor(const Batch& batch, Rng& rng, long long step) {
    const auto params = actor.parameters();
    zero_grad(params);
    Eigen::VectorXd logp;
    double actor_value = 0.0;
    {
        Tape tape;
        Var loss = actor_loss(tape, batch.obs, standard_normal(batch.obs.rows(), actor.action_dim(), rng), &logp);
        actor_value = loss.scalar();
        check_finite(actor_value, "actor", step);
        tape.backward(loss);
    }
    actor_opt_.step(params);

    log_alpha->zero_grad();
    Tape tape;
    Var loss = alpha_loss(tape, logp);
    check_finite(loss.scalar(), "temperature", step);
    tape.backward(loss);
    alpha_opt_.step({log_alpha});
    return {actor_value, loss.scalar()};
}

void SacAgent::update_targets() {
    for (std::size_t i = 0; i < critics.size(); ++i) {
        soft_update(critics[i].parameters(), targets[i].parameters(), config_.tau);
    }
}

SacLosses SacAgent::train_step(const ReplayBuffer& buffer, Rng& rng, long long step) {
    SacLosses out;
    const auto stepu = static_cast<std::size_t>(step);
    if (stepu % config_.critic_frequency != 0) return out;
    const Batch batch = buffer.sample(config_.batch_size, rng);
    out.critic = update_critic(batch, rng, step);
    if (stepu % config_.actor_frequency == 0) {
        for (std::size_t k = 0; k < config_.actor_frequency; ++k) {
            std::tie(out.actor, out.alpha) = update_actor(batch, rng, step);
        }
    }
    update_targets();
    return out;
}

ParamList SacAgent::critic_parameters() const {
    ParamList out;
    for (const auto& c : critics) {
        const auto p = c.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

ParamList SacAgent::parameters() const {
    ParamList out = actor.parameters();
    const auto c = critic_parameters();
    out.insert(out.end(), c.begin(), c.end());
    for (const auto& t : targets) {
        const auto p = t.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    out.push_back(log_alpha);
    return out;
}

}  // namespace vdpo::nn
