#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vdpo/envs/delay_wrapper.hpp"
#include "vdpo/nn/delayed_policy.hpp"
#include "vdpo/nn/sac.hpp"

namespace vdpo::nn {

/// One evaluation point of one series ("vdpo", "reference", "augmented_sac", "sac").
struct EvalRecord {
    std::uint64_t step = 0;
    std::string series;
    double return_mean = 0.0;
    double return_std = 0.0;
    std::map<std::string, double> diagnostics;
};

struct ReturnStats {
    double mean = 0.0;
    double std = 0.0;
};

using EvalCallback = std::function<void(const EvalRecord&)>;

/// Reset seed of evaluation episode `episode`; fixed across evaluation points.
std::uint64_t eval_episode_seed(std::uint64_t seed, std::size_t episode);

/// Population statistics of the undiscounted episode returns.
ReturnStats summarize_returns(const std::vector<double>& returns);

ReturnStats evaluate_actor(const GaussianActor& actor, const std::string& env, std::size_t episodes, std::uint64_t seed);
ReturnStats evaluate_delayed(const std::function<std::vector<double>(const envs::AugmentedObservation&)>& policy,
                             const std::string& env, const envs::DelayConfig& delay, std::size_t episodes,
                             std::uint64_t seed);
/// Uniformly random actions in the delay-free environment (the Ret_nor floor).
ReturnStats evaluate_random(const std::string& env, std::size_t episodes, std::uint64_t seed);

struct VdpoResult {
    std::unique_ptr<SacAgent> reference;
    std::unique_ptr<DelayedLearner> learner;
    std::vector<EvalRecord> records;
    std::uint64_t steps = 0;
};

struct SacResult {
    std::unique_ptr<SacAgent> agent;
    std::vector<EvalRecord> records;
    /// Critic loss of every update, in order; used for equivalence checks.
    std::vector<double> critic_losses;
    std::uint64_t steps = 0;
};

/// Reference SAC trained delay-free by its own rollouts, a transformer fitted
/// to the same trajectories, and evaluation of both: the delayed policy
/// through the delay wrapper ("vdpo") and the reference delay-free ("reference").
VdpoResult vdpo_train(const TrainConfig& config, const std::string& env, const envs::DelayConfig& delay,
                      std::uint64_t seed, const EvalCallback& on_eval = {});

/// SAC on flattened augmented observations. With max_delay 0 this is plain
/// SAC on the undelayed environment.
SacResult augmented_sac_train(const TrainConfig& config, const std::string& env, const envs::DelayConfig& delay,
                              std::uint64_t seed, const EvalCallback& on_eval = {});

SacResult sac_train(const TrainConfig& config, const std::string& env, std::uint64_t seed,
                    const EvalCallback& on_eval = {});

}  // namespace vdpo::nn
