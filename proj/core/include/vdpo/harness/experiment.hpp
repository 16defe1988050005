#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vdpo/harness/config.hpp"
#include "vdpo/harness/metrics.hpp"

namespace vdpo::harness {

struct SeriesPoint {
    std::uint64_t step = 0;
    double mean = 0.0;
    double std = 0.0;  // population std across seeds
    std::size_t count = 0;
};

using SeriesPoints = std::vector<SeriesPoint>;

struct Aggregate {
    std::map<std::string, std::vector<SeriesPoint>> series;
    std::optional<double> ret_rand;
    std::optional<double> ret_df;
    /// Per series: mean over seeds of Ret_nor of the final evaluation.
    std::map<std::string, double> ret_nor;
    /// Per series, per seed (in seed order): steps to reach ret_df.
    std::map<std::string, std::vector<std::optional<std::uint64_t>>> steps_to_threshold;
};

/// Statistics across seeds at every (series, step). Ret_df defaults to the
/// mean final return of the "reference" series when not given.
Aggregate aggregate_records(const std::map<std::uint64_t, std::vector<EvalRecord>>& per_seed,
                            std::optional<double> ret_df, std::optional<double> ret_rand);

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::string csv_path;
    std::string checkpoint_path;
};

struct ExperimentResult {
    std::string directory;
    std::vector<SeedOutcome> seeds;
    std::string aggregate_path;
    std::string config_path;
    bool partial = false;
    Aggregate aggregate;
};

using ProgressCallback = std::function<void(std::uint64_t seed, const EvalRecord&)>;

/// Runs every seed and writes into the resolved output directory:
/// seed_<s>.csv, seed_<s>.ckpt (neural algorithms), config.resolved and
/// aggregate.json. A failing seed is recorded and marks the bundle partial.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressCallback& progress = {});

/// Reads an aggregate.json written by run_experiment.
Aggregate load_aggregate(const std::string& path);

/// Deterministic evaluation of a checkpoint written by run_experiment.
/// Delayed policies run through the delay wrapper of the stored config.
nn::ReturnStats evaluate_checkpoint(const std::string& path, std::size_t episodes, std::uint64_t seed);

}  // namespace vdpo::harness
