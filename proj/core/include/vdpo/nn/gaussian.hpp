#pragma once

#include <vector>

#include "vdpo/nn/layers.hpp"

namespace vdpo::nn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Per-row diagonal Gaussian in pre-squash space (rows = batch).
struct GaussianPolicyParams {
    Matrix mean;
    Matrix log_std;
};

/// Affine map from tanh output in (-1, 1) to the action box.
struct ActionScale {
    Eigen::RowVectorXd scale;
    Eigen::RowVectorXd bias;

    static ActionScale from_bounds(const std::vector<double>& low, const std::vector<double>& high);
    Eigen::Index dim() const { return scale.size(); }
};

/// log_std = min + (max - min) * (tanh(raw) + 1) / 2, smooth and within [-5, 2].
Var squash_log_std(Var raw);

struct PolicyHead {
    Var mean;
    Var log_std;
};

struct PolicySample {
    Var action;    // squashed and scaled
    Var log_prob;  // B x 1
};

/// Reparameterised draw u = mean + std * noise, a = tanh(u) * scale + bias,
/// with the tanh change-of-variables correction in log_prob.
PolicySample sample_squashed(Tape& tape, const PolicyHead& head, const Matrix& noise, const ActionScale& box);

/// sum_d KL(N(mp, sp) || N(mq, sq)) per row, B x 1.
Var gaussian_kl(Var mean_p, Var log_std_p, Var mean_q, Var log_std_q);

/// Log density of squashed actions (no tape); rows of `actions` inside the box.
Eigen::VectorXd squashed_log_prob(const GaussianPolicyParams& params, const Matrix& actions, const ActionScale& scale);

Matrix deterministic_action(const Matrix& mean, const ActionScale& scale);

/// State-conditioned squashed Gaussian policy: MLP -> (mean, raw log std).
class GaussianActor {
public:
    GaussianActor() = default;
    GaussianActor(const std::string& name, Eigen::Index obs_dim, Eigen::Index act_dim,
                  const std::vector<Eigen::Index>& hidden, ActionScale scale, Rng& rng);

    PolicyHead head(Tape& tape, Var obs, bool trainable = true) const;
    GaussianPolicyParams distribution(const Matrix& obs) const;
    Matrix act(const Matrix& obs, Rng& rng, bool deterministic) const;

    ParamList parameters() const { return net.parameters(); }
    const ActionScale& action_scale() const noexcept { return scale; }
    Eigen::Index action_dim() const { return scale.dim(); }

    Mlp net;
    ActionScale scale;
};

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace vdpo::nn
