#pragma once

#include <vector>

#include "vdpo/nn/gaussian.hpp"
#include "vdpo/nn/train_config.hpp"

namespace vdpo::nn {

struct LayerNormParams {
    ParamPtr gamma;
    ParamPtr beta;

    LayerNormParams() = default;
    LayerNormParams(const std::string& name, Eigen::Index dim);
    Var forward(Tape& tape, Var x, bool trainable) const;
};

/// Pre-LN block: x + Drop(Proj(Attn(LN(x)))), then x + Drop(MLP(LN(x))).
struct TransformerBlock {
    LayerNormParams ln1;
    Linear qkv;
    Linear proj;
    LayerNormParams ln2;
    Linear fc1;
    Linear fc2;

    ParamList parameters() const;
};

/// Which parameter groups receive gradients in a forward pass.
struct TrainableGroups {
    bool encoder = false;
    bool belief_head = false;
    bool policy_head = false;
};

struct TransformerOutput {
    Var features;  // (B*Delta) x d
    Var belief;    // (B*Delta) x state_dim, row b*Delta + i-1 predicts s_{t-Delta+i}
    PolicyHead policy;  // (B*Delta) x action_dim each
};

/// Causal transformer over the serialized augmented state. Each of the Delta
/// tokens is (s_{t-Delta}, a_{t-Delta+i-1}); position i carries a belief
/// prediction of s_{t-Delta+i} and an action distribution for that state.
class DelayedTransformer {
public:
    DelayedTransformer() = default;
    DelayedTransformer(std::size_t state_dim, std::size_t action_dim, std::size_t delay, const TransformerConfig& config,
                       Rng& rng);

    /// `tokens` is (B*Delta) x (state_dim + action_dim), sequences stacked by rows.
    /// `dropout_rng` null means evaluation mode. Heads are only built when needed.
    TransformerOutput forward(Tape& tape, const Matrix& tokens, TrainableGroups groups, Rng* dropout_rng,
                              bool with_belief = true, bool with_policy = true) const;

    ParamList encoder_parameters() const;
    ParamList belief_parameters() const { return belief_head.parameters(); }
    ParamList policy_parameters() const { return policy_head.parameters(); }
    ParamList parameters() const;

    std::size_t state_dim() const noexcept { return state_dim_; }
    std::size_t action_dim() const noexcept { return action_dim_; }
    std::size_t delay() const noexcept { return delay_; }
    const TransformerConfig& config() const noexcept { return config_; }

    Linear embed;
    ParamPtr positional;
    std::vector<TransformerBlock> blocks;
    LayerNormParams final_norm;
    Linear belief_head;
    Mlp policy_head;

private:
    std::size_t state_dim_ = 0;
    std::size_t action_dim_ = 0;
    std::size_t delay_ = 0;
    TransformerConfig config_;
};

}  // namespace vdpo::nn
