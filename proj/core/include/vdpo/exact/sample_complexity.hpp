#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "vdpo/mdp/finite_mdp.hpp"

namespace vdpo::exact {

struct SampleBudgetReport {
    std::string method;
    /// Generative model samples plus demonstration pairs.
    std::uint64_t samples = 0;
    std::uint64_t model_samples = 0;
    std::uint64_t demonstration_samples = 0;
    double epsilon_hat = 0.0;
    double epsilon = 0.0;
    bool success = false;
    /// J*_Delta - J(returned policy) at rho_Delta on the true delayed MDP.
    double value_gap = 0.0;
};

enum class SuccessCriterion {
    /// Each stage is judged by the quantity its guarantee controls: sup-norm
    /// value error for the model-based stages, return gap to the (estimated)
    /// demonstrator for behaviour cloning.
    per_stage,
    /// Both arms stop once J*_Delta - J(policy) <= epsilon at rho_Delta.
    delayed_return,
};

struct SampleComplexityOptions {
    std::uint64_t sample_cap = 10'000'000;
    mdp::ActionIndex fill = 0;
    SuccessCriterion criterion = SuccessCriterion::per_stage;
};

/// Runs the augmented model-based policy iteration arm and the VDPO-style arm
/// (delay-free model-based PI followed by behaviour cloning onto augmented
/// states) with doubling budgets. Returns {mbpi, vdpo}.
std::pair<SampleBudgetReport, SampleBudgetReport> sample_complexity_experiment(
    const mdp::FiniteMdp& mdp, std::size_t delay, double epsilon, std::uint64_t seed,
    const SampleComplexityOptions& options = {});

/// One CSV line per report: seed,delay,epsilon,arm,samples,epsilon_hat,success.
std::string sample_complexity_csv_header();
std::string sample_complexity_csv_row(std::uint64_t seed, std::size_t delay, const SampleBudgetReport& report);

}  // namespace vdpo::exact
