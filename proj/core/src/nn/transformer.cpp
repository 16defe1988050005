#include "vdpo/nn/transformer.hpp"

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

LayerNormParams::LayerNormParams(const std::string& name, Eigen::Index dim)
    : gamma(constant_param(name + ".gamma", 1, dim, 1.0)), beta(constant_param(name + ".beta", 1, dim, 0.0)) {}

Var LayerNormParams::forward(Tape& tape, Var x, bool trainable) const {
    return layer_norm(x, tape.parameter(gamma, trainable), tape.parameter(beta, trainable));
}

ParamList TransformerBlock::parameters() const {
    return {ln1.gamma, ln1.beta, qkv.weight, qkv.bias, proj.weight, proj.bias,
            ln2.gamma, ln2.beta, fc1.weight, fc1.bias, fc2.weight, fc2.bias};
}

DelayedTransformer::DelayedTransformer(std::size_t state_dim, std::size_t action_dim, std::size_t delay,
                                       const TransformerConfig& config, Rng& rng)
    : state_dim_(state_dim), action_dim_(action_dim), delay_(delay), config_(config) {
    if (state_dim == 0 || action_dim == 0 || delay == 0) throw ConfigError("DelayedTransformer: dimensions must be positive");
    if (config.embed_dim == 0 || config.heads == 0 || config.embed_dim % config.heads != 0) {
        throw ConfigError("DelayedTransformer: embed_dim must be a positive multiple of heads");
    }
    const auto d = static_cast<Eigen::Index>(config.embed_dim);
    const auto hidden = static_cast<Eigen::Index>(config.mlp_ratio * config.embed_dim);
    embed = Linear("encoder.embed", static_cast<Eigen::Index>(state_dim + action_dim), d, rng);
    positional = normal_param("encoder.positional", static_cast<Eigen::Index>(delay), d, 0.02, rng);
    for (std::size_t l = 0; l < config.layers; ++l) {
        const std::string p = "encoder.block" + std::to_string(l);
        blocks.push_back(TransformerBlock{LayerNormParams(p + ".ln1", d), Linear(p + ".qkv", d, 3 * d, rng),
                                          Linear(p + ".proj", d, d, rng), LayerNormParams(p + ".ln2", d),
                                          Linear(p + ".fc1", d, hidden, rng), Linear(p + ".fc2", hidden, d, rng)});
    }
    final_norm = LayerNormParams("encoder.ln_f", d);
    belief_head = Linear("belief_head", d, static_cast<Eigen::Index>(state_dim), rng);
    policy_head = Mlp("policy_head", d, {d}, 2 * static_cast<Eigen::Index>(action_dim), rng);
}

TransformerOutput DelayedTransformer::forward(Tape& tape, const Matrix& tokens, TrainableGroups groups, Rng* dropout_rng,
                                              bool with_belief, bool with_policy) const {
    const auto T = static_cast<Eigen::Index>(delay_);
    if (tokens.cols() != static_cast<Eigen::Index>(state_dim_ + action_dim_) || tokens.rows() == 0 ||
        tokens.rows() % T != 0) {
        throw ConfigError("DelayedTransformer: token matrix does not match (B*Delta) x (state_dim + action_dim)");
    }
    const bool enc = groups.encoder;
    const double p = config_.dropout;
    const auto d = static_cast<Eigen::Index>(config_.embed_dim);

    Var x = embed.forward(tape, tape.constant(tokens), enc);
    x = add_positional(x, tape.parameter(positional, enc));
    x = dropout(x, p, dropout_rng);
    for (const auto& b : blocks) {
        Var h = b.ln1.forward(tape, x, enc);
        Var qkv = b.qkv.forward(tape, h, enc);
        Var att = causal_attention(slice_cols(qkv, 0, d), slice_cols(qkv, d, d), slice_cols(qkv, 2 * d, d), T,
                                   static_cast<Eigen::Index>(config_.heads), p, dropout_rng);
        x = add(x, dropout(b.proj.forward(tape, att, enc), p, dropout_rng));
        h = b.ln2.forward(tape, x, enc);
        h = b.fc2.forward(tape, gelu(b.fc1.forward(tape, h, enc)), enc);
        x = add(x, dropout(h, p, dropout_rng));
    }
    x = final_norm.forward(tape, x, enc);

    TransformerOutput out;
    out.features = x;
    if (with_belief) out.belief = belief_head.forward(tape, x, groups.belief_head);
    if (with_policy) {
        const auto A = static_cast<Eigen::Index>(action_dim_);
        Var raw = policy_head.forward(tape, x, groups.policy_head);
        out.policy = {slice_cols(raw, 0, A), squash_log_std(slice_cols(raw, A, A))};
    }
    return out;
}

ParamList DelayedTransformer::encoder_parameters() const {
    ParamList out{embed.weight, embed.bias, positional};
    for (const auto& b : blocks) {
        const auto p = b.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    out.push_back(final_norm.gamma);
    out.push_back(final_norm.beta);
    return out;
}

ParamList DelayedTransformer::parameters() const {
    ParamList out = encoder_parameters();
    for (const auto& p : belief_parameters()) out.push_back(p);
    for (const auto& p : policy_parameters()) out.push_back(p);
    return out;
}

}  // namespace vdpo::nn
