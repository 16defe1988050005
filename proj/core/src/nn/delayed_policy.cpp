#include "vdpo/nn/delayed_policy.hpp"

#include <cmath>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

Matrix serialize_tokens(std::span<const envs::AugmentedObservation> xs, std::size_t delay) {
    if (xs.empty() || delay == 0) throw DimensionError("serialize_tokens: empty input");
    const std::size_t sd = xs.front().delayed_state.size();
    const std::size_t ad = xs.front().action_buffer.empty() ? 0 : xs.front().action_buffer.front().size();
    const auto D = static_cast<Eigen::Index>(delay);
    Matrix tokens(static_cast<Eigen::Index>(xs.size()) * D, static_cast<Eigen::Index>(sd + ad));
    for (std::size_t b = 0; b < xs.size(); ++b) {
        const auto& x = xs[b];
        if (x.delayed_state.size() != sd || x.action_buffer.size() != delay) {
            throw DimensionError("serialize_tokens: observation does not match the delay");
        }
        for (std::size_t i = 0; i < delay; ++i) {
            if (x.action_buffer[i].size() != ad) throw DimensionError("serialize_tokens: buffered action has wrong size");
            const auto r = static_cast<Eigen::Index>(b * delay + i);
            for (std::size_t j = 0; j < sd; ++j) tokens(r, static_cast<Eigen::Index>(j)) = x.delayed_state[j];
            for (std::size_t j = 0; j < ad; ++j) tokens(r, static_cast<Eigen::Index>(sd + j)) = x.action_buffer[i][j];
        }
    }
    return tokens;
}

BcBatch make_bc_batch(std::span<const envs::BcPair> pairs) {
    if (pairs.empty()) throw ProtocolError("make_bc_batch: no pairs");
    std::vector<envs::AugmentedObservation> xs;
    xs.reserve(pairs.size());
    for (const auto& p : pairs) xs.push_back(p.x);
    const std::size_t delay = pairs.front().targets.size();
    BcBatch out;
    out.tokens = serialize_tokens(xs, delay);
    const std::size_t sd = xs.front().delayed_state.size();
    out.targets.resize(static_cast<Eigen::Index>(pairs.size() * delay), static_cast<Eigen::Index>(sd));
    for (std::size_t b = 0; b < pairs.size(); ++b) {
        for (std::size_t i = 0; i < delay; ++i) {
            for (std::size_t j = 0; j < sd; ++j) {
                out.targets(static_cast<Eigen::Index>(b * delay + i), static_cast<Eigen::Index>(j)) = pairs[b].targets[i][j];
            }
        }
    }
    out.size = pairs.size();
    return out;
}

BcBatch sample_bc_batch(const envs::TrajectoryStore& store, std::size_t batch, Rng& rng) {
    const auto& positions = store.pair_positions();
    if (positions.empty()) throw ProtocolError("sample_bc_batch: no revealed positions");
    const auto picks = sample_without_replacement(rng, positions.size(), std::min(batch, positions.size()));
    std::vector<envs::BcPair> pairs;
    pairs.reserve(picks.size());
    for (auto k : picks) pairs.push_back(envs::make_bc_pair(store, positions[k].first, positions[k].second, store.delay()));
    return make_bc_batch(pairs);
}

DelayedLearner::DelayedLearner(std::size_t state_dim, ActionScale s, std::size_t delay, const TrainConfig& config,
                               Rng& init_rng)
    : net(state_dim, static_cast<std::size_t>(s.dim()), delay, config.transformer, init_rng),
      box(std::move(s)),
      representation_(config.representation),
      encoder_opt_(AdamConfig{config.transformer_lr}),
      policy_opt_(AdamConfig{config.transformer_lr}) {}

Var DelayedLearner::belief_loss(Tape& tape, const BcBatch& batch, Rng* dropout_rng) const {
    const auto out = net.forward(tape, batch.tokens, {true, true, false}, dropout_rng, true, false);
    const double denom = static_cast<double>(batch.size * net.state_dim());
    return scale(sum(square(sub(out.belief, tape.constant(batch.targets)))), 1.0 / denom);
}

Var DelayedLearner::policy_loss(Tape& tape, const BcBatch& batch, const GaussianActor& reference, Rng* dropout_rng) const {
    const bool train_encoder = !has_belief_head();
    const auto out = net.forward(tape, batch.tokens, {train_encoder, false, true}, dropout_rng, false, true);
    const auto ref = reference.distribution(batch.targets);
    Var kl = gaussian_kl(out.policy.mean, out.policy.log_std, tape.constant(ref.mean), tape.constant(ref.log_std));
    return scale(sum(kl), 1.0 / static_cast<double>(batch.size));
}

double DelayedLearner::update_belief(const BcBatch& batch, Rng& rng, long long step) {
    if (!has_belief_head()) return 0.0;
    ParamList params = net.encoder_parameters();
    for (const auto& p : net.belief_parameters()) params.push_back(p);
    zero_grad(params);
    Tape tape;
    Var loss = belief_loss(tape, batch, &rng);
    if (!std::isfinite(loss.scalar())) throw TrainingAborted("non-finite belief loss", step);
    tape.backward(loss);
    encoder_opt_.step(params);
    return loss.scalar();
}

double DelayedLearner::update_policy(const BcBatch& batch, const GaussianActor& reference, Rng& rng, long long step) {
    ParamList params = net.policy_parameters();
    if (!has_belief_head()) {
        for (const auto& p : net.encoder_parameters()) params.push_back(p);
    }
    zero_grad(params);
    Tape tape;
    Var loss = policy_loss(tape, batch, reference, &rng);
    if (!std::isfinite(loss.scalar())) throw TrainingAborted("non-finite KL loss", step);
    tape.backward(loss);
    policy_opt_.step(params);
    return loss.scalar();
}

GaussianPolicyParams DelayedLearner::position_distributions(const envs::AugmentedObservation& x) const {
    const Matrix tokens = serialize_tokens(std::span(&x, 1), net.delay());
    Tape tape;
    const auto out = net.forward(tape, tokens, {}, nullptr, false, true);
    return {out.policy.mean.value(), out.policy.log_std.value()};
}

std::vector<double> DelayedLearner::act(const envs::AugmentedObservation& x, Rng& rng, bool deterministic) const {
    const auto dist = position_distributions(x);
    const Eigen::Index last = dist.mean.rows() - 1;
    Matrix u = dist.mean.row(last);
    if (!deterministic) {
        for (Eigen::Index j = 0; j < u.cols(); ++j) u(0, j) += std::exp(dist.log_std(last, j)) * rng.normal();
    }
    const Matrix a = deterministic_action(u, box);
    return {a.data(), a.data() + a.size()};
}

}  // namespace vdpo::nn
