#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vdpo/envs/delay_wrapper.hpp"
#include "vdpo/nn/train_config.hpp"

namespace vdpo::harness {

enum class Algorithm { vdpo, augmented_sac, sac, exact_vdpo, mbpi };

Algorithm parse_algorithm(const std::string& text);
std::string to_string(Algorithm a);
bool is_exact(Algorithm a);

/// Parameters of the tabular algorithms; each seed is one random instance.
struct ExactSettings {
    std::size_t states = 4;
    std::size_t actions = 2;
    double gamma = 0.9;
    double epsilon = 0.1;
    std::string criterion = "per_stage";
};

/// Key-value experiment description:
///
///     env = pendulum
///     algorithm = vdpo
///     delay_mode = constant
///     delay = 2
///     seeds = 0,1,2,3,4
///     total_steps = 20000
///     output_dir = pendulum_d2
///     train.actor_lr = 3e-4
///     exact.states = 4
///
/// `train.<key>` forwards to TrainConfig::set, `exact.<key>` to ExactSettings.
/// A relative output_dir is resolved under $VDPO_OUTPUT_ROOT when set.
struct ExperimentConfig {
    std::string env = "pendulum";
    Algorithm algorithm = Algorithm::vdpo;
    envs::DelayMode delay_mode = envs::DelayMode::constant;
    std::size_t delay = 1;
    double stochastic_prob_max = 0.9;
    std::vector<std::uint64_t> seeds = {0};
    std::string output_dir = "results";
    /// Delay-free reference return for steps-to-threshold and Ret_nor. When
    /// unset, VDPO bundles use their own reference series.
    std::optional<double> ret_df;
    nn::TrainConfig train;
    ExactSettings exact;

    void validate() const;
    envs::DelayConfig delay_config() const;
    void set(const std::string& key, const std::string& value);
    /// Fully resolved key-value form; parse_experiment_config round-trips it.
    std::map<std::string, std::string> to_map() const;
    std::string to_text() const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// `dir` itself if absolute or VDPO_OUTPUT_ROOT is unset, else root/dir.
std::string resolve_output_dir(const std::string& dir);

}  // namespace vdpo::harness
