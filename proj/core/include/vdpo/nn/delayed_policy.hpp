#pragma once

#include <span>

#include "vdpo/envs/trajectory_store.hpp"
#include "vdpo/nn/transformer.hpp"

namespace vdpo::nn {

/// Delta rows per observation: row i-1 is (delayed_state, action_buffer[i-1]).
Matrix serialize_tokens(std::span<const envs::AugmentedObservation> xs, std::size_t delay);

/// Behaviour-cloning minibatch. `targets` row b*Delta + i-1 holds s_{t-Delta+i},
/// which is both the belief target and the reference policy's input.
struct BcBatch {
    Matrix tokens;
    Matrix targets;
    std::size_t size = 0;
};

BcBatch make_bc_batch(std::span<const envs::BcPair> pairs);
/// Up to `batch` distinct revealed positions of the store, uniformly.
BcBatch sample_bc_batch(const envs::TrajectoryStore& store, std::size_t batch, Rng& rng);

/// Transformer with a belief decoder and a policy decoder, trained by
/// reconstruction and by KL distillation from a reference actor.
class DelayedLearner {
public:
    DelayedLearner(std::size_t state_dim, ActionScale scale, std::size_t delay, const TrainConfig& config, Rng& init_rng);

    /// sum_i mean_{b, d} (b_i(x) - s_{t-Delta+i})^2
    Var belief_loss(Tape& tape, const BcBatch& batch, Rng* dropout_rng) const;
    /// sum_i KL(pi^(i)(.|x) || pi_ref(.|s_{t-Delta+i})) averaged over the batch.
    /// The encoder is a constant unless the representation has no belief head.
    Var policy_loss(Tape& tape, const BcBatch& batch, const GaussianActor& reference, Rng* dropout_rng) const;

    double update_belief(const BcBatch& batch, Rng& rng, long long step);
    double update_policy(const BcBatch& batch, const GaussianActor& reference, Rng& rng, long long step);

    /// Action from the last position, which targets the current state s_t.
    std::vector<double> act(const envs::AugmentedObservation& x, Rng& rng, bool deterministic) const;
    GaussianPolicyParams position_distributions(const envs::AugmentedObservation& x) const;

    bool has_belief_head() const noexcept { return representation_ == Representation::transformer; }
    ParamList parameters() const { return net.parameters(); }

    DelayedTransformer net;
    ActionScale box;

private:
    Representation representation_;
    Adam encoder_opt_;
    Adam policy_opt_;
};

}  // namespace vdpo::nn
