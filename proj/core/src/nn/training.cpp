#include "vdpo/nn/training.hpp"

#include <cmath>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

namespace {

enum Stream : std::uint64_t { kInit = 11, kSac = 12, kBc = 13, kEnv = 14, kDelay = 15 };

ActionScale scale_of(const envs::EnvSpec& spec) { return ActionScale::from_bounds(spec.action_low, spec.action_high); }

std::vector<double> random_action(const envs::EnvSpec& spec, Rng& rng) {
    std::vector<double> a(spec.action_dim);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(spec.action_low[i], spec.action_high[i]);
    return a;
}

std::vector<double> actor_action(const SacAgent& agent, std::span<const double> obs, Rng& rng, bool deterministic) {
    const Matrix o = Eigen::Map<const Eigen::RowVectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
    const Matrix a = agent.act(o, rng, deterministic);
    return {a.data(), a.data() + a.size()};
}

EvalRecord make_record(std::uint64_t step, std::string series, ReturnStats stats, std::map<std::string, double> diag) {
    return {step, std::move(series), stats.mean, stats.std, std::move(diag)};
}

std::map<std::string, double> sac_diagnostics(const SacLosses& l, const SacAgent& agent) {
    return {{"critic_loss", l.critic}, {"actor_loss", l.actor}, {"alpha_loss", l.alpha}, {"alpha", agent.alpha()}};
}

}  // namespace

std::uint64_t eval_episode_seed(std::uint64_t seed, std::size_t episode) { return mix_seed(seed, 1000000 + episode); }

ReturnStats summarize_returns(const std::vector<double>& returns) {
    if (returns.empty()) return {};
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    return {mean, std::sqrt(var / static_cast<double>(returns.size()))};
}

ReturnStats evaluate_actor(const GaussianActor& actor, const std::string& env_name, std::size_t episodes,
                           std::uint64_t seed) {
    auto env = envs::make_env(env_name);
    std::vector<double> returns;
    Rng unused(0);
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        auto obs = env->reset(eval_episode_seed(seed, ep));
        double total = 0.0;
        for (;;) {
            const Matrix o = Eigen::Map<const Eigen::RowVectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
            const Matrix a = actor.act(o, unused, true);
            auto r = env->step(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
            total += r.reward;
            if (r.done()) break;
            obs = std::move(r.observation);
        }
        returns.push_back(total);
    }
    return summarize_returns(returns);
}

ReturnStats evaluate_delayed(const std::function<std::vector<double>(const envs::AugmentedObservation&)>& policy,
                             const std::string& env_name, const envs::DelayConfig& delay, std::size_t episodes,
                             std::uint64_t seed) {
    std::vector<double> returns;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        envs::DelayedEnv env(envs::make_env(env_name), delay, mix_seed(eval_episode_seed(seed, ep), kDelay));
        auto x = env.reset(eval_episode_seed(seed, ep));
        double total = 0.0;
        for (;;) {
            auto r = env.step(policy(x));
            total += r.reward;
            if (r.done) break;
            x = std::move(r.observation);
        }
        returns.push_back(total);
    }
    return summarize_returns(returns);
}

ReturnStats evaluate_random(const std::string& env_name, std::size_t episodes, std::uint64_t seed) {
    auto env = envs::make_env(env_name);
    Rng rng(mix_seed(seed, 0x7a4d));
    std::vector<double> returns;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        env->reset(eval_episode_seed(seed, ep));
        double total = 0.0;
        for (;;) {
            auto r = env->step(random_action(env->spec(), rng));
            total += r.reward;
            if (r.done()) break;
        }
        returns.push_back(total);
    }
    return summarize_returns(returns);
}

VdpoResult vdpo_train(const TrainConfig& config, const std::string& env_name, const envs::DelayConfig& delay,
                      std::uint64_t seed, const EvalCallback& on_eval) {
    config.validate();
    auto env = envs::make_env(env_name);
    const auto& spec = env->spec();
    delay.validate(spec.action_dim);

    Rng init_rng(mix_seed(seed, kInit));
    Rng sac_rng(mix_seed(seed, kSac));
    Rng bc_rng(mix_seed(seed, kBc));
    Rng env_rng(mix_seed(seed, kEnv));

    VdpoResult result;
    result.reference = std::make_unique<SacAgent>(spec.state_dim, scale_of(spec), config, init_rng);
    result.learner = std::make_unique<DelayedLearner>(spec.state_dim, scale_of(spec), delay.max_delay, config, init_rng);
    auto& agent = *result.reference;
    auto& learner = *result.learner;

    ReplayBuffer buffer(config.buffer_capacity, spec.state_dim, spec.action_dim);
    envs::TrajectoryStore store(spec.state_dim, spec.action_dim, delay.max_delay);

    SacLosses losses;
    double belief_loss = 0.0;
    double kl_loss = 0.0;
    auto obs = env->reset(env_rng.next_u64());
    store.begin_episode(obs);
    std::size_t episode_t = 0;

    for (std::uint64_t step = 1; step <= config.total_steps; ++step) {
        const auto a = step <= config.learning_starts ? random_action(spec, sac_rng) : actor_action(agent, obs, sac_rng, false);
        auto r = env->step(a);
        buffer.add(obs, a, r.reward, r.observation, r.terminated);
        store.record_step(a, r.reward, r.observation);
        ++episode_t;
        store.reveal_through(episode_t, static_cast<std::int64_t>(episode_t));
        if (r.done()) {
            store.end_episode();
            obs = env->reset(env_rng.next_u64());
            store.begin_episode(obs);
            episode_t = 0;
        } else {
            obs = std::move(r.observation);
        }

        const auto istep = static_cast<long long>(step);
        if (step > config.learning_starts) {
            const auto l = agent.train_step(buffer, sac_rng, istep);
            losses.critic = l.critic;
            if (step % config.actor_frequency == 0) {
                losses.actor = l.actor;
                losses.alpha = l.alpha;
            }
            if (!store.pair_positions().empty()) {
                if (learner.has_belief_head() && step % config.belief_frequency == 0) {
                    belief_loss = learner.update_belief(sample_bc_batch(store, config.bc_batch_size, bc_rng), bc_rng, istep);
                }
                if (step % config.policy_decoder_frequency == 0) {
                    for (std::size_t k = 0; k < config.policy_decoder_iterations; ++k) {
                        kl_loss = learner.update_policy(sample_bc_batch(store, config.bc_batch_size, bc_rng), agent.actor,
                                                        bc_rng, istep);
                    }
                }
            }
        }

        if (step % config.eval_interval == 0 || step == config.total_steps) {
            auto diag = sac_diagnostics(losses, agent);
            diag["belief_loss"] = belief_loss;
            diag["kl_loss"] = kl_loss;
            Rng unused(0);
            const auto delayed = evaluate_delayed(
                [&](const envs::AugmentedObservation& x) { return learner.act(x, unused, true); }, env_name, delay,
                config.eval_episodes, seed);
            result.records.push_back(make_record(step, "vdpo", delayed, diag));
            result.records.push_back(
                make_record(step, "reference", evaluate_actor(agent.actor, env_name, config.eval_episodes, seed), diag));
            if (on_eval) {
                on_eval(result.records[result.records.size() - 2]);
                on_eval(result.records.back());
            }
        }
    }
    result.steps = config.total_steps;
    return result;
}

SacResult augmented_sac_train(const TrainConfig& config, const std::string& env_name, const envs::DelayConfig& delay,
                              std::uint64_t seed, const EvalCallback& on_eval) {
    config.validate();
    const bool delayed = delay.max_delay > 0;
    auto base = envs::make_env(env_name);
    const envs::EnvSpec spec = base->spec();
    if (delayed) delay.validate(spec.action_dim);
    const std::size_t obs_dim = spec.state_dim + delay.max_delay * spec.action_dim;

    Rng init_rng(mix_seed(seed, kInit));
    Rng sac_rng(mix_seed(seed, kSac));
    Rng env_rng(mix_seed(seed, kEnv));

    SacResult result;
    result.agent = std::make_unique<SacAgent>(obs_dim, scale_of(spec), config, init_rng);
    auto& agent = *result.agent;
    ReplayBuffer buffer(config.buffer_capacity, obs_dim, spec.action_dim);

    std::unique_ptr<envs::DelayedEnv> denv;
    if (delayed) denv = std::make_unique<envs::DelayedEnv>(std::move(base), delay, mix_seed(seed, kDelay));
    auto reset = [&] { return delayed ? denv->reset(env_rng.next_u64()).flatten() : base->reset(env_rng.next_u64()); };

    SacLosses losses;
    auto obs = reset();
    for (std::uint64_t step = 1; step <= config.total_steps; ++step) {
        const auto a = step <= config.learning_starts ? random_action(spec, sac_rng) : actor_action(agent, obs, sac_rng, false);
        std::vector<double> next;
        double reward = 0.0;
        bool terminated = false;
        bool done = false;
        if (delayed) {
            auto r = denv->step(a);
            next = r.observation.flatten();
            reward = r.reward;
            terminated = r.terminated;
            done = r.done;
        } else {
            auto r = base->step(a);
            next = std::move(r.observation);
            reward = r.reward;
            terminated = r.terminated;
            done = r.done();
        }
        buffer.add(obs, a, reward, next, terminated);
        obs = done ? reset() : std::move(next);

        if (step > config.learning_starts) {
            const auto l = agent.train_step(buffer, sac_rng, static_cast<long long>(step));
            losses.critic = l.critic;
            result.critic_losses.push_back(l.critic);
            if (step % config.actor_frequency == 0) {
                losses.actor = l.actor;
                losses.alpha = l.alpha;
            }
        }

        if (step % config.eval_interval == 0 || step == config.total_steps) {
            ReturnStats stats;
            if (delayed) {
                stats = evaluate_delayed(
                    [&](const envs::AugmentedObservation& x) {
                        const auto flat = x.flatten();
                        Rng unused(0);
                        return actor_action(agent, flat, unused, true);
                    },
                    env_name, delay, config.eval_episodes, seed);
            } else {
                stats = evaluate_actor(agent.actor, env_name, config.eval_episodes, seed);
            }
            result.records.push_back(make_record(step, delayed ? "augmented_sac" : "sac", stats, sac_diagnostics(losses, agent)));
            if (on_eval) on_eval(result.records.back());
        }
    }
    result.steps = config.total_steps;
    return result;
}

SacResult sac_train(const TrainConfig& config, const std::string& env, std::uint64_t seed, const EvalCallback& on_eval) {
    envs::DelayConfig none;
    none.max_delay = 0;
    return augmented_sac_train(config, env, none, seed, on_eval);
}

}  // namespace vdpo::nn
