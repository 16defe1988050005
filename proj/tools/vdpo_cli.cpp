#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"
#include "vdpo/exact/fixed_point.hpp"
#include "vdpo/exact/sample_complexity.hpp"
#include "vdpo/harness/experiment.hpp"
#include "vdpo/harness/plot.hpp"
#include "vdpo/harness/verify.hpp"

namespace {

using namespace vdpo;

struct ExactArgs {
    bool verify = false;
    std::string experiment = "sample-complexity";
    std::size_t instances = 20;
    std::uint64_t seed_base = 0;
    std::size_t states = 4;
    std::size_t actions = 2;
    std::size_t delay = 3;
    double epsilon = 0.1;
    std::string criterion = "per_stage";
    std::string csv;
};

int run_exact(const ExactArgs& args) {
    if (args.verify) {
        bool ok = true;
        for (const auto& c : harness::run_exact_checks()) {
            std::cout << harness::format_outcome(c) << std::endl;
            ok &= c.passed;
        }
        return ok ? 0 : 1;
    }
    std::string out;
    if (args.experiment == "sample-complexity") {
        exact::SampleComplexityOptions opts;
        opts.criterion = args.criterion == "delayed_return" ? exact::SuccessCriterion::delayed_return
                                                            : exact::SuccessCriterion::per_stage;
        out = exact::sample_complexity_csv_header() + "\n";
        for (std::size_t i = 0; i < args.instances; ++i) {
            const auto seed = args.seed_base + i;
            const auto m = mdp::random_mdp(seed, args.states, args.actions);
            const auto [mbpi, vdpo] = exact::sample_complexity_experiment(m, args.delay, args.epsilon, seed, opts);
            out += exact::sample_complexity_csv_row(seed, args.delay, mbpi) + "\n";
            out += exact::sample_complexity_csv_row(seed, args.delay, vdpo) + "\n";
        }
    } else if (args.experiment == "monotonicity") {
        std::vector<std::size_t> delays;
        for (std::size_t d = 0; d <= args.delay; ++d) delays.push_back(d);
        out = "seed,delay,j_star\n";
        for (std::size_t i = 0; i < args.instances; ++i) {
            const auto seed = args.seed_base + i;
            const auto j = exact::delay_performance_profile(mdp::random_mdp(seed, args.states, args.actions), delays);
            for (std::size_t k = 0; k < j.size(); ++k) {
                out += std::to_string(seed) + "," + std::to_string(delays[k]) + "," + format_double(j[k]) + "\n";
            }
        }
    } else if (args.experiment == "fixed-point") {
        out = "seed,delay,residual\n";
        for (std::size_t i = 0; i < args.instances; ++i) {
            const auto seed = args.seed_base + i;
            const auto m = mdp::random_mdp(seed, args.states, args.actions);
            const auto pi = exact::exact_vdpo(m, args.delay);
            out += std::to_string(seed) + "," + std::to_string(args.delay) + "," +
                   format_double(exact::fixed_point_residual(m, args.delay, pi)) + "\n";
        }
    } else {
        throw ConfigError("unknown exact experiment '" + args.experiment + "'");
    }
    if (args.csv.empty()) {
        std::cout << out;
    } else {
        write_file(args.csv, out);
    }
    return 0;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides, bool quiet) {
    auto cfg = harness::load_experiment_config(config_path);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
        cfg.set(std::string(trim(o.substr(0, eq))), std::string(trim(o.substr(eq + 1))));
    }
    const auto progress = [quiet](std::uint64_t seed, const nn::EvalRecord& r) {
        if (quiet) return;
        std::fprintf(stderr, "seed %llu step %llu %s return %.2f +- %.2f\n", static_cast<unsigned long long>(seed),
                     static_cast<unsigned long long>(r.step), r.series.c_str(), r.return_mean, r.return_std);
    };
    const auto res = harness::run_experiment(cfg, progress);
    for (const auto& s : res.seeds) {
        if (!s.ok) std::cerr << "seed " << s.seed << " failed: " << s.error << "\n";
    }
    std::cout << "wrote " << res.aggregate_path << (res.partial ? " (partial)" : "") << "\n";
    for (const auto& [name, score] : res.aggregate.ret_nor) std::cout << name << " Ret_nor " << score << "\n";
    return res.partial ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed-observation RL toolkit: exact tabular experiments and neural training"};
    app.require_subcommand(1);

    ExactArgs exact_args;
    auto* exact_cmd = app.add_subcommand("exact", "Tabular experiments (fixed-point, monotonicity, sample-complexity)");
    exact_cmd->add_flag("--verify", exact_args.verify, "Run the exact-tier acceptance checks; nonzero exit on failure");
    exact_cmd->add_option("--experiment", exact_args.experiment, "fixed-point | monotonicity | sample-complexity")
        ->check(CLI::IsMember({"fixed-point", "monotonicity", "sample-complexity"}));
    exact_cmd->add_option("--instances", exact_args.instances, "Number of random instances");
    exact_cmd->add_option("--seed-base", exact_args.seed_base, "First instance seed");
    exact_cmd->add_option("--states", exact_args.states, "|S|");
    exact_cmd->add_option("--actions", exact_args.actions, "|A|");
    exact_cmd->add_option("--delay", exact_args.delay, "Delta (maximum Delta for monotonicity)");
    exact_cmd->add_option("--epsilon", exact_args.epsilon, "Target accuracy for sample complexity");
    exact_cmd->add_option("--criterion", exact_args.criterion, "per_stage | delayed_return")
        ->check(CLI::IsMember({"per_stage", "delayed_return"}));
    exact_cmd->add_option("--csv", exact_args.csv, "Write CSV here instead of stdout");

    std::string config_path;
    std::vector<std::string> overrides;
    bool quiet = false;
    auto* train_cmd = app.add_subcommand("train", "Run an experiment config (all seeds) and write a results bundle");
    train_cmd->add_option("config", config_path, "Key-value experiment file")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--set", overrides, "Override a config key: key=value (repeatable)");
    train_cmd->add_flag("--quiet", quiet, "No per-evaluation progress on stderr");

    std::string checkpoint;
    std::size_t episodes = 10;
    std::uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint deterministically");
    eval_cmd->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--episodes", episodes, "Evaluation episodes");
    eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");

    std::vector<std::string> bundles;
    std::string svg_path = "curves.svg";
    auto* plot_cmd = app.add_subcommand("plot", "Render learning curves of one or more bundles to SVG");
    plot_cmd->add_option("bundles", bundles, "Result bundle directories")->required();
    plot_cmd->add_option("-o,--output", svg_path, "SVG output path");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*exact_cmd) return run_exact(exact_args);
        if (*train_cmd) return run_train(config_path, overrides, quiet);
        if (*eval_cmd) {
            const auto stats = harness::evaluate_checkpoint(checkpoint, episodes, eval_seed);
            std::cout << "return " << format_double(stats.mean) << " +- " << format_double(stats.std) << "\n";
            return 0;
        }
        if (*plot_cmd) {
            harness::plot_bundles(bundles, svg_path);
            std::cout << "wrote " << svg_path << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
