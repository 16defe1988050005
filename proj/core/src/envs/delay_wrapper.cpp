#include "vdpo/envs/delay_wrapper.hpp"

#include <algorithm>
#include <cmath>

#include "vdpo/common/error.hpp"

namespace vdpo::envs {

DelayMode parse_delay_mode(const std::string& text) {
    if (text == "constant") return DelayMode::constant;
    if (text == "stochastic") return DelayMode::stochastic;
    throw ConfigError("unknown delay mode '" + text + "'");
}

std::string to_string(DelayMode mode) { return mode == DelayMode::constant ? "constant" : "stochastic"; }

void DelayConfig::validate(std::size_t action_dim) const {
    if (max_delay < 1) throw ConfigError("DelayConfig: max_delay must be at least 1");
    if (!(stochastic_prob_max >= 0.0 && stochastic_prob_max <= 1.0)) {
        throw ConfigError("DelayConfig: stochastic_prob_max must lie in [0, 1]");
    }
    if (!initial_action_fill.empty() && initial_action_fill.size() != action_dim) {
        throw ConfigError("DelayConfig: initial_action_fill must have action_dim entries");
    }
}

DelayedEnv::DelayedEnv(std::unique_ptr<Environment> env, DelayConfig config, std::uint64_t delay_seed)
    : env_(std::move(env)),
      config_(std::move(config)),
      delay_rng_(delay_seed),
      store_(env_->spec().state_dim, env_->spec().action_dim, config_.max_delay) {
    config_.validate(env_->spec().action_dim);
    if (config_.initial_action_fill.empty()) config_.initial_action_fill.assign(env_->spec().action_dim, 0.0);
}

AugmentedObservation DelayedEnv::reset(std::uint64_t seed) {
    const auto s0 = env_->reset(seed);
    episode_ = store_.begin_episode(s0);
    t_ = 0;
    revealed_ = -static_cast<std::int64_t>(config_.max_delay);
    store_.reveal_through(0, 0);
    done_ = false;
    return observe();
}

std::size_t DelayedEnv::sample_delay() {
    const std::size_t full = config_.max_delay;
    std::size_t delta = full;
    if (config_.mode == DelayMode::stochastic && full > 1 && !delay_rng_.bernoulli(config_.stochastic_prob_max)) {
        delta = 1 + static_cast<std::size_t>(delay_rng_.uniform_int(full - 1));
    }
    ++delay_draws_;
    if (delta == full) ++full_delay_draws_;
    return delta;
}

DelayedStepResult DelayedEnv::step(std::span<const double> action) {
    if (done_) throw ProtocolError("DelayedEnv: step called on a finished episode");
    const auto& spec = env_->spec();
    if (action.size() != spec.action_dim) throw DimensionError("DelayedEnv: action has wrong size");
    std::vector<double> applied(action.begin(), action.end());
    for (std::size_t i = 0; i < applied.size(); ++i) {
        if (!std::isfinite(applied[i])) throw NumericError("DelayedEnv: non-finite action");
        applied[i] = std::clamp(applied[i], spec.action_low[i], spec.action_high[i]);
    }

    const auto result = env_->step(applied);
    store_.record_step(applied, result.reward, result.observation);
    ++t_;

    const std::int64_t prev = revealed_;
    const auto candidate = static_cast<std::int64_t>(t_) - static_cast<std::int64_t>(sample_delay());
    revealed_ = std::max(revealed_, candidate);
    if (revealed_ < prev) ++violations_;
    if (revealed_ > 0) store_.reveal_through(static_cast<std::size_t>(revealed_), static_cast<std::int64_t>(t_));

    DelayedStepResult out;
    out.observation = observe();
    out.reward = result.reward;
    out.done = result.done();
    out.terminated = result.terminated;
    if (out.done) {
        store_.end_episode();
        done_ = true;
    }
    return out;
}

AugmentedObservation DelayedEnv::observe() {
    const std::size_t delay = config_.max_delay;
    const std::size_t lag = static_cast<std::size_t>(static_cast<std::int64_t>(t_) - revealed_);
    if (lag > delay) ++violations_;

    const auto shown = static_cast<std::size_t>(std::max<std::int64_t>(revealed_, 0));
    const auto& ep = store_.episodes()[episode_];
    if (ep.reveal_times[shown] == TrajectoryStore::kUnrevealed ||
        ep.reveal_times[shown] > static_cast<std::int64_t>(t_)) {
        ++violations_;
    }

    AugmentedObservation obs;
    const auto s = store_.state(episode_, shown);
    obs.delayed_state.assign(s.begin(), s.end());
    obs.freshness_lag = lag;
    obs.action_buffer.reserve(delay);
    for (std::size_t i = lag; i < delay; ++i) obs.action_buffer.push_back(config_.initial_action_fill);
    for (std::int64_t k = revealed_; k < static_cast<std::int64_t>(t_); ++k) {
        if (k < 0) {
            obs.action_buffer.push_back(config_.initial_action_fill);
        } else {
            const auto a = store_.action(episode_, static_cast<std::size_t>(k));
            obs.action_buffer.emplace_back(a.begin(), a.end());
        }
    }
    return obs;
}

}  // namespace vdpo::envs
