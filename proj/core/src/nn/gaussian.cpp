#include "vdpo/nn/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
const double kLog2 = std::log(2.0);
}  // namespace

ActionScale ActionScale::from_bounds(const std::vector<double>& low, const std::vector<double>& high) {
    if (low.size() != high.size() || low.empty()) throw DimensionError("ActionScale: bad bounds");
    ActionScale s;
    s.scale.resize(static_cast<Eigen::Index>(low.size()));
    s.bias.resize(static_cast<Eigen::Index>(low.size()));
    for (std::size_t i = 0; i < low.size(); ++i) {
        s.scale(static_cast<Eigen::Index>(i)) = 0.5 * (high[i] - low[i]);
        s.bias(static_cast<Eigen::Index>(i)) = 0.5 * (high[i] + low[i]);
    }
    return s;
}

Var squash_log_std(Var raw) {
    return add_scalar(scale(add_scalar(tanh(raw), 1.0), 0.5 * (kLogStdMax - kLogStdMin)), kLogStdMin);
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
    }
    return m;
}

PolicySample sample_squashed(Tape& tape, const PolicyHead& head, const Matrix& noise, const ActionScale& box) {
    const Eigen::Index B = head.mean.rows();
    const Eigen::Index A = head.mean.cols();
    if (noise.rows() != B || noise.cols() != A || box.dim() != A) throw DimensionError("sample_squashed: shape mismatch");
    Var eps = tape.constant(noise);
    Var u = add(head.mean, mul(exp(head.log_std), eps));
    Var squashed = tanh(u);
    Var action = add_row(mul(squashed, tape.constant(box.scale.replicate(B, 1))), tape.constant(box.bias));

    // log N(u; mean, std) = -eps^2/2 - log std - log(2 pi)/2
    Matrix base = -0.5 * noise.array().square() - kHalfLog2Pi;
    base.rowwise() -= box.scale.array().log().matrix();
    // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
    Var log_det = scale(add_scalar(add(u, softplus(scale(u, -2.0))), -kLog2), -2.0);
    Var per_dim = add(sub(tape.constant(base), head.log_std), scale(log_det, -1.0));
    return {action, row_sum(per_dim)};
}

Var gaussian_kl(Var mean_p, Var log_std_p, Var mean_q, Var log_std_q) {
    // log sq - log sp + (sp^2 + (mp - mq)^2) / (2 sq^2) - 1/2
    Var var_p = exp(scale(log_std_p, 2.0));
    Var inv_var_q = exp(scale(log_std_q, -2.0));
    Var diff2 = square(sub(mean_p, mean_q));
    Var ratio = scale(mul(add(var_p, diff2), inv_var_q), 0.5);
    Var per_dim = add_scalar(add(sub(log_std_q, log_std_p), ratio), -0.5);
    return row_sum(per_dim);
}

Eigen::VectorXd squashed_log_prob(const GaussianPolicyParams& params, const Matrix& actions, const ActionScale& scale) {
    const Eigen::Index B = actions.rows();
    Eigen::VectorXd out(B);
    for (Eigen::Index r = 0; r < B; ++r) {
        double lp = 0.0;
        for (Eigen::Index d = 0; d < actions.cols(); ++d) {
            const double y = (actions(r, d) - scale.bias(d)) / scale.scale(d);
            const double u = std::atanh(y);
            const double sd = std::exp(params.log_std(r, d));
            const double z = (u - params.mean(r, d)) / sd;
            lp += -0.5 * z * z - params.log_std(r, d) - kHalfLog2Pi - std::log(scale.scale(d)) - std::log1p(-y * y);
        }
        out(r) = lp;
    }
    return out;
}

Matrix deterministic_action(const Matrix& mean, const ActionScale& scale) {
    Matrix a = mean.array().tanh();
    a = (a.array().rowwise() * scale.scale.array()).rowwise() + scale.bias.array();
    return a;
}

GaussianActor::GaussianActor(const std::string& name, Eigen::Index obs_dim, Eigen::Index act_dim,
                             const std::vector<Eigen::Index>& hidden, ActionScale s, Rng& rng)
    : net(name, obs_dim, hidden, 2 * act_dim, rng), scale(std::move(s)) {
    if (scale.dim() != act_dim) throw DimensionError("GaussianActor: action scale has wrong size");
}

PolicyHead GaussianActor::head(Tape& tape, Var obs, bool trainable) const {
    const Eigen::Index A = scale.dim();
    Var out = net.forward(tape, obs, trainable);
    return {slice_cols(out, 0, A), squash_log_std(slice_cols(out, A, A))};
}

GaussianPolicyParams GaussianActor::distribution(const Matrix& obs) const {
    Tape tape;
    const auto h = head(tape, tape.constant(obs), false);
    return {h.mean.value(), h.log_std.value()};
}

Matrix GaussianActor::act(const Matrix& obs, Rng& rng, bool deterministic) const {
    const auto dist = distribution(obs);
    if (deterministic) return deterministic_action(dist.mean, scale);
    const Matrix noise = standard_normal(dist.mean.rows(), dist.mean.cols(), rng);
    const Matrix u = dist.mean.array() + dist.log_std.array().exp() * noise.array();
    return deterministic_action(u, scale);
}

}  // namespace vdpo::nn
