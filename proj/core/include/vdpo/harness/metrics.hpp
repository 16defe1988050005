#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vdpo/nn/training.hpp"

namespace vdpo::harness {

using nn::EvalRecord;

/// (ret_alg - ret_rand) / (ret_df - ret_rand); throws NumericError when
/// ret_df and ret_rand coincide.
double ret_nor(double ret_alg, double ret_rand, double ret_df);

/// First step whose mean return reaches `threshold`, records sorted by step.
std::optional<std::uint64_t> steps_to_threshold(std::span<const EvalRecord> records, double threshold);

/// Records of one series, in their original order.
std::vector<EvalRecord> select_series(std::span<const EvalRecord> records, const std::string& series);

inline constexpr int kMetricsSchemaVersion = 1;

/// Fixed long-format schema, one row per (step, series):
/// schema_version,seed,step,series,return_mean,return_std,critic_loss,
/// actor_loss,alpha_loss,alpha,belief_loss,kl_loss. Missing diagnostics are empty.
std::string metrics_csv(std::uint64_t seed, std::span<const EvalRecord> records);
/// Parses a file written by metrics_csv. Throws ConfigError on a schema mismatch.
std::vector<EvalRecord> parse_metrics_csv(const std::string& text, std::uint64_t* seed = nullptr);

}  // namespace vdpo::harness
