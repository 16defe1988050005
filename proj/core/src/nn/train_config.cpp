#include "vdpo/nn/train_config.hpp"

#include <cmath>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"

namespace vdpo::nn {

Representation parse_representation(const std::string& text) {
    if (text == "transformer") return Representation::transformer;
    if (text == "no_belief") return Representation::no_belief;
    throw ConfigError("unknown representation '" + text + "'");
}

std::string to_string(Representation r) { return r == Representation::transformer ? "transformer" : "no_belief"; }

namespace {

std::size_t parse_count(const std::string& key, const std::string& value) {
    const long long v = parse_int(value);
    if (v < 0) throw ConfigError(key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + " expects true or false");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const auto& part : split(value, ',')) {
        const auto t = trim(part);
        if (!t.empty()) out.push_back(parse_count(key, std::string(t)));
    }
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("TrainConfig: " + what);
}

}  // namespace

void TrainConfig::validate() const {
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    require(batch_size > 0 && bc_batch_size > 0, "batch sizes must be positive");
    require(actor_lr > 0.0 && critic_lr > 0.0 && alpha_lr > 0.0 && transformer_lr > 0.0, "learning rates must be positive");
    require(initial_alpha > 0.0, "initial_alpha must be positive");
    require(!target_entropy || std::isfinite(*target_entropy), "target_entropy must be finite");
    require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
    require(actor_frequency >= 1 && critic_frequency >= 1 && belief_frequency >= 1 && policy_decoder_frequency >= 1,
            "frequencies must be at least 1");
    require(!hidden.empty(), "hidden must list at least one layer");
    for (auto h : hidden) require(h > 0, "hidden sizes must be positive");
    require(buffer_capacity >= batch_size, "buffer_capacity must hold a batch");
    require(transformer.embed_dim > 0 && transformer.heads > 0 && transformer.layers > 0 && transformer.mlp_ratio > 0,
            "transformer sizes must be positive");
    require(transformer.embed_dim % transformer.heads == 0, "transformer.embed_dim must be divisible by heads");
    require(transformer.dropout >= 0.0 && transformer.dropout < 1.0, "transformer.dropout must lie in [0, 1)");
    require(eval_interval > 0 && eval_episodes > 0, "evaluation cadence must be positive");
}

double TrainConfig::resolved_target_entropy(std::size_t action_dim) const {
    return target_entropy.value_or(-static_cast<double>(action_dim));
}

void TrainConfig::set(const std::string& key, const std::string& value) {
    if (key == "gamma") gamma = parse_double(value);
    else if (key == "batch_size") batch_size = parse_count(key, value);
    else if (key == "actor_lr") actor_lr = parse_double(value);
    else if (key == "critic_lr") critic_lr = parse_double(value);
    else if (key == "alpha_lr") alpha_lr = parse_double(value);
    else if (key == "initial_alpha") initial_alpha = parse_double(value);
    else if (key == "target_entropy") target_entropy = value == "auto" ? std::nullopt : std::optional(parse_double(value));
    else if (key == "tau") tau = parse_double(value);
    else if (key == "actor_frequency") actor_frequency = parse_count(key, value);
    else if (key == "critic_frequency") critic_frequency = parse_count(key, value);
    else if (key == "hidden") hidden = parse_sizes(key, value);
    else if (key == "twin_critic") twin_critic = parse_bool(key, value);
    else if (key == "buffer_capacity") buffer_capacity = parse_count(key, value);
    else if (key == "learning_starts") learning_starts = parse_count(key, value);
    else if (key == "belief_frequency") belief_frequency = parse_count(key, value);
    else if (key == "policy_decoder_frequency") policy_decoder_frequency = parse_count(key, value);
    else if (key == "policy_decoder_iterations") policy_decoder_iterations = parse_count(key, value);
    else if (key == "bc_batch_size") bc_batch_size = parse_count(key, value);
    else if (key == "transformer_lr") transformer_lr = parse_double(value);
    else if (key == "transformer.embed_dim") transformer.embed_dim = parse_count(key, value);
    else if (key == "transformer.heads") transformer.heads = parse_count(key, value);
    else if (key == "transformer.layers") transformer.layers = parse_count(key, value);
    else if (key == "transformer.dropout") transformer.dropout = parse_double(value);
    else if (key == "transformer.mlp_ratio") transformer.mlp_ratio = parse_count(key, value);
    else if (key == "representation") representation = parse_representation(value);
    else if (key == "total_steps") total_steps = parse_count(key, value);
    else if (key == "eval_interval") eval_interval = parse_count(key, value);
    else if (key == "eval_episodes") eval_episodes = parse_count(key, value);
    else throw ConfigError("unknown training key '" + key + "'");
}

std::map<std::string, std::string> TrainConfig::to_map() const {
    return {
        {"gamma", format_double(gamma)},
        {"batch_size", std::to_string(batch_size)},
        {"actor_lr", format_double(actor_lr)},
        {"critic_lr", format_double(critic_lr)},
        {"alpha_lr", format_double(alpha_lr)},
        {"initial_alpha", format_double(initial_alpha)},
        {"target_entropy", target_entropy ? format_double(*target_entropy) : "auto"},
        {"tau", format_double(tau)},
        {"actor_frequency", std::to_string(actor_frequency)},
        {"critic_frequency", std::to_string(critic_frequency)},
        {"hidden", join_sizes(hidden)},
        {"twin_critic", twin_critic ? "true" : "false"},
        {"buffer_capacity", std::to_string(buffer_capacity)},
        {"learning_starts", std::to_string(learning_starts)},
        {"belief_frequency", std::to_string(belief_frequency)},
        {"policy_decoder_frequency", std::to_string(policy_decoder_frequency)},
        {"policy_decoder_iterations", std::to_string(policy_decoder_iterations)},
        {"bc_batch_size", std::to_string(bc_batch_size)},
        {"transformer_lr", format_double(transformer_lr)},
        {"transformer.embed_dim", std::to_string(transformer.embed_dim)},
        {"transformer.heads", std::to_string(transformer.heads)},
        {"transformer.layers", std::to_string(transformer.layers)},
        {"transformer.dropout", format_double(transformer.dropout)},
        {"transformer.mlp_ratio", std::to_string(transformer.mlp_ratio)},
        {"representation", to_string(representation)},
        {"total_steps", std::to_string(total_steps)},
        {"eval_interval", std::to_string(eval_interval)},
        {"eval_episodes", std::to_string(eval_episodes)},
    };
}

}  // namespace vdpo::nn
