#include "vdpo/nn/layers.hpp"

#include <cmath>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

ParamPtr uniform_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
    }
    return std::make_shared<Parameter>(name, std::move(m));
}

ParamPtr normal_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = stddev * rng.normal();
    }
    return std::make_shared<Parameter>(name, std::move(m));
}

ParamPtr constant_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, double value) {
    return std::make_shared<Parameter>(name, Matrix::Constant(rows, cols, value));
}

Linear::Linear(const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    weight = uniform_param(name + ".weight", in, out, bound, rng);
    bias = uniform_param(name + ".bias", 1, out, bound, rng);
}

Linear Linear::normal_init(const std::string& name, Eigen::Index in, Eigen::Index out, double stddev, Rng& rng) {
    Linear l;
    l.weight = normal_param(name + ".weight", in, out, stddev, rng);
    l.bias = constant_param(name + ".bias", 1, out, 0.0);
    return l;
}

Var Linear::forward(Tape& tape, Var x, bool trainable) const {
    return linear(x, tape.parameter(weight, trainable), tape.parameter(bias, trainable));
}

Var activate(Var x, Activation act) {
    switch (act) {
        case Activation::relu: return relu(x);
        case Activation::tanh: return tanh(x);
        case Activation::gelu: return gelu(x);
    }
    return x;
}

Mlp::Mlp(const std::string& name, Eigen::Index in, const std::vector<Eigen::Index>& hidden, Eigen::Index out, Rng& rng,
         Activation act)
    : activation(act) {
    Eigen::Index prev = in;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        layers.emplace_back(name + "." + std::to_string(i), prev, hidden[i], rng);
        prev = hidden[i];
    }
    layers.emplace_back(name + "." + std::to_string(hidden.size()), prev, out, rng);
}

Var Mlp::forward(Tape& tape, Var x, bool trainable) const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        x = layers[i].forward(tape, x, trainable);
        if (i + 1 < layers.size()) x = activate(x, activation);
    }
    return x;
}

ParamList Mlp::parameters() const {
    ParamList out;
    for (const auto& l : layers) {
        out.push_back(l.weight);
        out.push_back(l.bias);
    }
    return out;
}

Eigen::Index Mlp::in_dim() const { return layers.front().weight->value.rows(); }
Eigen::Index Mlp::out_dim() const { return layers.back().weight->value.cols(); }

ParamList clone_parameters(const ParamList& params) {
    ParamList out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(std::make_shared<Parameter>(p->name, p->value));
    return out;
}

void copy_values(const ParamList& from, const ParamList& to) {
    if (from.size() != to.size()) throw DimensionError("copy_values: parameter lists differ");
    for (std::size_t i = 0; i < from.size(); ++i) to[i]->value = from[i]->value;
}

void soft_update(const ParamList& from, const ParamList& to, double tau) {
    if (from.size() != to.size()) throw DimensionError("soft_update: parameter lists differ");
    for (std::size_t i = 0; i < from.size(); ++i) {
        to[i]->value = tau * from[i]->value + (1.0 - tau) * to[i]->value;
    }
}

void zero_grad(const ParamList& params) {
    for (const auto& p : params) p->zero_grad();
}

bool all_finite(const ParamList& params) {
    for (const auto& p : params) {
        if (!p->value.allFinite()) return false;
    }
    return true;
}

void Adam::step(const ParamList& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const double step_size = config_.lr / c1;
    for (const auto& p : params) {
        p->adam_m = config_.beta1 * p->adam_m + (1.0 - config_.beta1) * p->grad;
        p->adam_v = config_.beta2 * p->adam_v + (1.0 - config_.beta2) * p->grad.cwiseProduct(p->grad);
        p->value.array() -= step_size * p->adam_m.array() / ((p->adam_v.array() / c2).sqrt() + config_.eps);
    }
}

}  // namespace vdpo::nn
