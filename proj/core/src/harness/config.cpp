#include "vdpo/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"
#include "vdpo/envs/environment.hpp"

namespace vdpo::harness {

Algorithm parse_algorithm(const std::string& text) {
    if (text == "vdpo") return Algorithm::vdpo;
    if (text == "augmented_sac") return Algorithm::augmented_sac;
    if (text == "sac") return Algorithm::sac;
    if (text == "exact_vdpo") return Algorithm::exact_vdpo;
    if (text == "mbpi") return Algorithm::mbpi;
    throw ConfigError("unknown algorithm '" + text + "'");
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::vdpo: return "vdpo";
        case Algorithm::augmented_sac: return "augmented_sac";
        case Algorithm::sac: return "sac";
        case Algorithm::exact_vdpo: return "exact_vdpo";
        case Algorithm::mbpi: return "mbpi";
    }
    return "vdpo";
}

bool is_exact(Algorithm a) { return a == Algorithm::exact_vdpo || a == Algorithm::mbpi; }

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("experiment: seeds must not be empty");
    if (output_dir.empty()) throw ConfigError("experiment: output_dir must not be empty");
    if (is_exact(algorithm)) {
        if (exact.states == 0 || exact.actions == 0) throw ConfigError("experiment: exact sizes must be positive");
        if (!(exact.gamma > 0.0 && exact.gamma < 1.0)) throw ConfigError("experiment: exact.gamma must lie in (0, 1)");
        if (!(exact.epsilon > 0.0)) throw ConfigError("experiment: exact.epsilon must be positive");
        if (exact.criterion != "per_stage" && exact.criterion != "delayed_return") {
            throw ConfigError("experiment: exact.criterion must be per_stage or delayed_return");
        }
        return;
    }
    train.validate();
    if (train.total_steps == 0) throw ConfigError("experiment: total_steps must be positive");
    const auto names = envs::env_names();
    if (std::find(names.begin(), names.end(), env) == names.end()) throw ConfigError("experiment: unknown env '" + env + "'");
    if (algorithm == Algorithm::vdpo && delay == 0) throw ConfigError("experiment: vdpo needs delay >= 1");
}

envs::DelayConfig ExperimentConfig::delay_config() const {
    envs::DelayConfig d;
    d.mode = delay_mode;
    d.max_delay = algorithm == Algorithm::sac ? 0 : delay;
    d.stochastic_prob_max = stochastic_prob_max;
    return d;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key.starts_with("train.")) {
        train.set(key.substr(6), value);
    } else if (key.starts_with("exact.")) {
        const auto k = key.substr(6);
        if (k == "states") exact.states = static_cast<std::size_t>(parse_int(value));
        else if (k == "actions") exact.actions = static_cast<std::size_t>(parse_int(value));
        else if (k == "gamma") exact.gamma = parse_double(value);
        else if (k == "epsilon") exact.epsilon = parse_double(value);
        else if (k == "criterion") exact.criterion = value;
        else throw ConfigError("unknown exact key '" + k + "'");
    } else if (key == "env") {
        env = value;
    } else if (key == "algorithm") {
        algorithm = parse_algorithm(value);
    } else if (key == "delay_mode") {
        delay_mode = envs::parse_delay_mode(value);
    } else if (key == "delay") {
        const auto d = parse_int(value);
        if (d < 0) throw ConfigError("delay must be non-negative");
        delay = static_cast<std::size_t>(d);
    } else if (key == "stochastic_prob_max") {
        stochastic_prob_max = parse_double(value);
    } else if (key == "seeds") {
        seeds.clear();
        for (const auto& part : split(value, ',')) {
            const auto t = trim(part);
            if (t.empty()) continue;
            const auto s = parse_int(t);
            if (s < 0) throw ConfigError("seeds must be non-negative");
            seeds.push_back(static_cast<std::uint64_t>(s));
        }
    } else if (key == "output_dir") {
        output_dir = value;
    } else if (key == "ret_df") {
        ret_df = value == "auto" ? std::nullopt : std::optional(parse_double(value));
    } else if (key == "total_steps" || key == "eval_interval" || key == "eval_episodes") {
        train.set(key, value);
    } else {
        throw ConfigError("unknown experiment key '" + key + "'");
    }
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
    std::map<std::string, std::string> out;
    out["env"] = env;
    out["algorithm"] = to_string(algorithm);
    out["delay_mode"] = envs::to_string(delay_mode);
    out["delay"] = std::to_string(delay);
    out["stochastic_prob_max"] = format_double(stochastic_prob_max);
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
    out["seeds"] = s;
    out["output_dir"] = output_dir;
    out["ret_df"] = ret_df ? format_double(*ret_df) : "auto";
    for (const auto& [k, v] : train.to_map()) out["train." + k] = v;
    out["exact.states"] = std::to_string(exact.states);
    out["exact.actions"] = std::to_string(exact.actions);
    out["exact.gamma"] = format_double(exact.gamma);
    out["exact.epsilon"] = format_double(exact.epsilon);
    out["exact.criterion"] = exact.criterion;
    return out;
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
    return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : parse_key_values(text)) cfg.set(k, v);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) { return parse_experiment_config(read_file(path)); }

std::string resolve_output_dir(const std::string& dir) {
    const std::filesystem::path p(dir);
    const char* root = std::getenv("VDPO_OUTPUT_ROOT");
    if (p.is_absolute() || root == nullptr || *root == '\0') return p.string();
    return (std::filesystem::path(root) / p).string();
}

}  // namespace vdpo::harness
