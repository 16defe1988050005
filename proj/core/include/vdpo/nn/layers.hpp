#pragma once

#include <string>
#include <vector>

#include "vdpo/nn/autodiff.hpp"

namespace vdpo::nn {

/// W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), b likewise (PyTorch nn.Linear default).
ParamPtr uniform_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng);
ParamPtr normal_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
ParamPtr constant_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, double value);

class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);
    /// Weights N(0, stddev), zero bias.
    static Linear normal_init(const std::string& name, Eigen::Index in, Eigen::Index out, double stddev, Rng& rng);

    Var forward(Tape& tape, Var x, bool trainable = true) const;
    ParamList parameters() const { return {weight, bias}; }

    ParamPtr weight;
    ParamPtr bias;
};

enum class Activation { relu, tanh, gelu };

Var activate(Var x, Activation act);

/// Fully connected network; `act` after every hidden layer, none after the last.
class Mlp {
public:
    Mlp() = default;
    Mlp(const std::string& name, Eigen::Index in, const std::vector<Eigen::Index>& hidden, Eigen::Index out, Rng& rng,
        Activation act = Activation::relu);

    Var forward(Tape& tape, Var x, bool trainable = true) const;
    ParamList parameters() const;
    Eigen::Index in_dim() const;
    Eigen::Index out_dim() const;

    std::vector<Linear> layers;
    Activation activation = Activation::relu;
};

/// Deep copy of parameter values (fresh moments and grads), keeping names.
ParamList clone_parameters(const ParamList& params);
void copy_values(const ParamList& from, const ParamList& to);
/// to <- tau * from + (1 - tau) * to
void soft_update(const ParamList& from, const ParamList& to, double tau);
void zero_grad(const ParamList& params);
bool all_finite(const ParamList& params);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moments live in each Parameter; the optimizer
/// only keeps the step count.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    void step(const ParamList& params);
    std::uint64_t steps() const noexcept { return t_; }
    void set_steps(std::uint64_t t) noexcept { t_ = t; }
    const AdamConfig& config() const noexcept { return config_; }

private:
    AdamConfig config_;
    std::uint64_t t_ = 0;
};

}  // namespace vdpo::nn
