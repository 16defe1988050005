#include "vdpo/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"
#include "vdpo/exact/sample_complexity.hpp"
#include "vdpo/nn/checkpoint.hpp"

namespace vdpo::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string checkpoint_kind(Algorithm a) { return a == Algorithm::vdpo ? "vdpo" : "sac"; }

std::vector<EvalRecord> run_neural(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& ckpt,
                                   const ProgressCallback& progress) {
    auto on_eval = [&](const EvalRecord& r) {
        if (progress) progress(seed, r);
    };
    auto meta = cfg.to_map();
    meta["seed"] = std::to_string(seed);
    meta["checkpoint.kind"] = checkpoint_kind(cfg.algorithm);
    if (cfg.algorithm == Algorithm::vdpo) {
        auto res = nn::vdpo_train(cfg.train, cfg.env, cfg.delay_config(), seed, on_eval);
        auto params = res.reference->parameters();
        for (const auto& p : res.learner->parameters()) params.push_back(p);
        nn::save_checkpoint(ckpt, params, meta, res.steps);
        return res.records;
    }
    auto res = nn::augmented_sac_train(cfg.train, cfg.env, cfg.delay_config(), seed, on_eval);
    nn::save_checkpoint(ckpt, res.agent->parameters(), meta, res.steps);
    return res.records;
}

json exact_summary(const ExperimentConfig& cfg, const std::vector<std::pair<std::uint64_t, exact::SampleBudgetReport>>& rows) {
    json j;
    j["arm"] = to_string(cfg.algorithm);
    std::vector<double> samples;
    std::size_t successes = 0;
    json per_seed = json::array();
    for (const auto& [seed, r] : rows) {
        samples.push_back(static_cast<double>(r.samples));
        successes += r.success ? 1 : 0;
        per_seed.push_back({{"seed", seed}, {"samples", r.samples}, {"epsilon_hat", r.epsilon_hat}, {"success", r.success}});
    }
    j["mean_samples"] = samples.empty() ? 0.0 : mean_of(samples);
    j["success_rate"] = rows.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(rows.size());
    j["per_seed"] = per_seed;
    return j;
}

json aggregate_to_json(const Aggregate& agg) {
    json j;
    json series = json::object();
    for (const auto& [name, points] : agg.series) {
        json arr = json::array();
        for (const auto& p : points) arr.push_back({{"step", p.step}, {"mean", p.mean}, {"std", p.std}, {"count", p.count}});
        series[name] = arr;
    }
    j["series"] = series;
    j["ret_rand"] = agg.ret_rand ? json(*agg.ret_rand) : json(nullptr);
    j["ret_df"] = agg.ret_df ? json(*agg.ret_df) : json(nullptr);
    j["ret_nor"] = agg.ret_nor;
    json steps = json::object();
    for (const auto& [name, v] : agg.steps_to_threshold) {
        json arr = json::array();
        for (const auto& s : v) arr.push_back(s ? json(*s) : json(nullptr));
        steps[name] = arr;
    }
    j["steps_to_threshold"] = steps;
    return j;
}

}  // namespace

Aggregate aggregate_records(const std::map<std::uint64_t, std::vector<EvalRecord>>& per_seed, std::optional<double> ret_df,
                            std::optional<double> ret_rand) {
    Aggregate agg;
    agg.ret_rand = ret_rand;
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> by_point;
    std::set<std::string> names;
    for (const auto& [seed, records] : per_seed) {
        for (const auto& r : records) {
            by_point[r.series][r.step].push_back(r.return_mean);
            names.insert(r.series);
        }
    }
    for (const auto& [name, steps] : by_point) {
        for (const auto& [step, values] : steps) {
            const double m = mean_of(values);
            agg.series[name].push_back({step, m, pop_std(values, m), values.size()});
        }
    }

    auto final_returns = [&](const std::string& name) {
        std::vector<double> out;
        for (const auto& [seed, records] : per_seed) {
            const auto s = select_series(records, name);
            if (!s.empty()) out.push_back(s.back().return_mean);
        }
        return out;
    };
    if (ret_df) {
        agg.ret_df = ret_df;
    } else if (names.contains("reference")) {
        agg.ret_df = mean_of(final_returns("reference"));
    }
    if (!agg.ret_df) return agg;

    for (const auto& name : names) {
        if (name == "reference") continue;
        auto& v = agg.steps_to_threshold[name];
        for (const auto& [seed, records] : per_seed) {
            const auto s = select_series(records, name);
            v.push_back(steps_to_threshold(s, *agg.ret_df));
        }
        if (agg.ret_rand) {
            std::vector<double> scores;
            for (double r : final_returns(name)) scores.push_back(ret_nor(r, *agg.ret_rand, *agg.ret_df));
            if (!scores.empty()) agg.ret_nor[name] = mean_of(scores);
        }
    }
    return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressCallback& progress) {
    config.validate();
    ExperimentResult result;
    result.directory = resolve_output_dir(config.output_dir);
    fs::create_directories(result.directory);
    const fs::path dir(result.directory);

    result.config_path = (dir / "config.resolved").string();
    write_file(result.config_path, config.to_text());

    json agg_json;
    agg_json["schema_version"] = kMetricsSchemaVersion;
    agg_json["algorithm"] = to_string(config.algorithm);
    agg_json["config"] = config.to_map();
    agg_json["seeds"] = config.seeds;

    std::map<std::uint64_t, std::vector<EvalRecord>> per_seed;
    std::vector<std::pair<std::uint64_t, exact::SampleBudgetReport>> exact_rows;
    json failures = json::array();
    for (const auto seed : config.seeds) {
        SeedOutcome outcome;
        outcome.seed = seed;
        outcome.csv_path = (dir / ("seed_" + std::to_string(seed) + ".csv")).string();
        try {
            if (is_exact(config.algorithm)) {
                const auto mdp = mdp::random_mdp(seed, config.exact.states, config.exact.actions, config.exact.gamma);
                exact::SampleComplexityOptions opts;
                opts.criterion = config.exact.criterion == "delayed_return" ? exact::SuccessCriterion::delayed_return
                                                                            : exact::SuccessCriterion::per_stage;
                const auto [mbpi, vdpo] = exact::sample_complexity_experiment(mdp, config.delay, config.exact.epsilon, seed, opts);
                const auto& report = config.algorithm == Algorithm::mbpi ? mbpi : vdpo;
                write_file(outcome.csv_path, exact::sample_complexity_csv_header() + "\n" +
                                                 exact::sample_complexity_csv_row(seed, config.delay, report) + "\n");
                exact_rows.emplace_back(seed, report);
            } else {
                outcome.checkpoint_path = (dir / ("seed_" + std::to_string(seed) + ".ckpt")).string();
                auto records = run_neural(config, seed, outcome.checkpoint_path, progress);
                write_file(outcome.csv_path, metrics_csv(seed, records));
                per_seed[seed] = std::move(records);
            }
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.error = e.what();
            result.partial = true;
            failures.push_back({{"seed", seed}, {"error", outcome.error}});
        }
        result.seeds.push_back(std::move(outcome));
    }

    if (is_exact(config.algorithm)) {
        agg_json["exact"] = exact_summary(config, exact_rows);
    } else {
        std::vector<double> rand;
        for (const auto& [seed, records] : per_seed) {
            rand.push_back(nn::evaluate_random(config.env, config.train.eval_episodes, seed).mean);
        }
        const auto ret_rand = rand.empty() ? std::nullopt : std::optional(mean_of(rand));
        result.aggregate = aggregate_records(per_seed, config.ret_df, ret_rand);
        agg_json.update(aggregate_to_json(result.aggregate));
    }
    agg_json["partial"] = result.partial;
    agg_json["failures"] = failures;
    result.aggregate_path = (dir / "aggregate.json").string();
    write_file(result.aggregate_path, agg_json.dump(2) + "\n");
    return result;
}

Aggregate load_aggregate(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("aggregate: cannot parse '" + path + "': " + e.what());
    }
    Aggregate agg;
    if (!j.contains("series")) return agg;
    for (const auto& [name, arr] : j["series"].items()) {
        for (const auto& p : arr) {
            agg.series[name].push_back({p.at("step").get<std::uint64_t>(), p.at("mean").get<double>(),
                                        p.at("std").get<double>(), p.at("count").get<std::size_t>()});
        }
    }
    if (!j["ret_rand"].is_null()) agg.ret_rand = j["ret_rand"].get<double>();
    if (!j["ret_df"].is_null()) agg.ret_df = j["ret_df"].get<double>();
    for (const auto& [name, v] : j["ret_nor"].items()) agg.ret_nor[name] = v.get<double>();
    for (const auto& [name, arr] : j["steps_to_threshold"].items()) {
        auto& out = agg.steps_to_threshold[name];
        for (const auto& s : arr) out.push_back(s.is_null() ? std::nullopt : std::optional(s.get<std::uint64_t>()));
    }
    return agg;
}

nn::ReturnStats evaluate_checkpoint(const std::string& path, std::size_t episodes, std::uint64_t seed) {
    const auto ckpt = nn::load_checkpoint(path);
    ExperimentConfig cfg;
    for (const auto& [k, v] : ckpt.config) {
        if (k != "seed" && !k.starts_with("checkpoint.")) cfg.set(k, v);
    }
    const auto kind = ckpt.config.count("checkpoint.kind") ? ckpt.config.at("checkpoint.kind") : "";
    auto env = envs::make_env(cfg.env);
    const auto& spec = env->spec();
    const auto scale = nn::ActionScale::from_bounds(spec.action_low, spec.action_high);
    const auto delay = cfg.delay_config();
    Rng init(0);
    if (kind == "vdpo") {
        nn::SacAgent reference(spec.state_dim, scale, cfg.train, init);
        nn::DelayedLearner learner(spec.state_dim, scale, delay.max_delay, cfg.train, init);
        auto params = reference.parameters();
        for (const auto& p : learner.parameters()) params.push_back(p);
        nn::restore_parameters(ckpt, params);
        Rng unused(0);
        return nn::evaluate_delayed([&](const envs::AugmentedObservation& x) { return learner.act(x, unused, true); },
                                    cfg.env, delay, episodes, seed);
    }
    if (kind != "sac") throw ConfigError("checkpoint: unknown kind '" + kind + "'");
    const std::size_t obs_dim = spec.state_dim + delay.max_delay * spec.action_dim;
    nn::SacAgent agent(obs_dim, scale, cfg.train, init);
    nn::restore_parameters(ckpt, agent.parameters());
    if (delay.max_delay == 0) return nn::evaluate_actor(agent.actor, cfg.env, episodes, seed);
    return nn::evaluate_delayed(
        [&](const envs::AugmentedObservation& x) {
            const auto flat = x.flatten();
            const Eigen::Map<const Eigen::RowVectorXd> row(flat.data(), static_cast<Eigen::Index>(flat.size()));
            Rng unused(0);
            const nn::Matrix a = agent.act(nn::Matrix(row), unused, true);
            return std::vector<double>(a.data(), a.data() + a.size());
        },
        cfg.env, delay, episodes, seed);
}

}  // namespace vdpo::harness
