#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vdpo::nn {

enum class Representation { transformer, no_belief };

Representation parse_representation(const std::string& text);
std::string to_string(Representation r);

struct TransformerConfig {
    std::size_t embed_dim = 64;
    std::size_t heads = 1;
    std::size_t layers = 3;
    double dropout = 0.1;
    std::size_t mlp_ratio = 4;
};

/// Hyper-parameters shared by the reference SAC learner, VDPO and A-SAC.
/// Defaults are desk scale; nothing here depends on the environment except
/// the target entropy, which falls back to -|A|.
struct TrainConfig {
    double gamma = 0.99;
    std::size_t batch_size = 256;
    double actor_lr = 3e-4;
    double critic_lr = 1e-3;
    double alpha_lr = 1e-3;
    double initial_alpha = 1.0;
    std::optional<double> target_entropy;
    double tau = 5e-3;
    std::size_t actor_frequency = 2;
    std::size_t critic_frequency = 1;
    std::vector<std::size_t> hidden = {128, 128};
    bool twin_critic = false;
    std::size_t buffer_capacity = 100000;
    std::size_t learning_starts = 1000;

    std::size_t belief_frequency = 1;
    std::size_t policy_decoder_frequency = 1000;
    std::size_t policy_decoder_iterations = 200;
    std::size_t bc_batch_size = 64;
    double transformer_lr = 3e-4;
    TransformerConfig transformer;
    Representation representation = Representation::transformer;

    std::uint64_t total_steps = 20000;
    std::uint64_t eval_interval = 2000;
    std::size_t eval_episodes = 10;

    void validate() const;
    double resolved_target_entropy(std::size_t action_dim) const;

    /// Sets one field from its key-value name (e.g. "actor_lr", "transformer.embed_dim").
    void set(const std::string& key, const std::string& value);
    /// Every field as key -> canonical text, suitable for `set`.
    std::map<std::string, std::string> to_map() const;
};

}  // namespace vdpo::nn
