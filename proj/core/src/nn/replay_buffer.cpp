#include "vdpo/nn/replay_buffer.hpp"

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t action_dim)
    : capacity_(capacity) {
    if (capacity == 0 || obs_dim == 0 || action_dim == 0) throw ConfigError("ReplayBuffer: sizes must be positive");
    const auto n = static_cast<Eigen::Index>(capacity);
    obs_.resize(n, static_cast<Eigen::Index>(obs_dim));
    actions_.resize(n, static_cast<Eigen::Index>(action_dim));
    rewards_.resize(n);
    next_obs_.resize(n, static_cast<Eigen::Index>(obs_dim));
    terminals_.resize(n);
}

void ReplayBuffer::add(std::span<const double> obs, std::span<const double> action, double reward,
                       std::span<const double> next_obs, bool terminal) {
    if (obs.size() != obs_dim() || next_obs.size() != obs_dim() || action.size() != action_dim()) {
        throw DimensionError("ReplayBuffer: transition has wrong size");
    }
    const auto r = static_cast<Eigen::Index>(head_);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        obs_(r, static_cast<Eigen::Index>(i)) = obs[i];
        next_obs_(r, static_cast<Eigen::Index>(i)) = next_obs[i];
    }
    for (std::size_t i = 0; i < action.size(); ++i) actions_(r, static_cast<Eigen::Index>(i)) = action[i];
    rewards_(r) = reward;
    terminals_(r) = terminal ? 1.0 : 0.0;
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

Batch ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    if (batch == 0 || batch > size_) throw ProtocolError("ReplayBuffer: not enough transitions to sample");
    const auto idx = sample_without_replacement(rng, size_, batch);
    const auto B = static_cast<Eigen::Index>(batch);
    Batch out{Matrix(B, obs_.cols()), Matrix(B, actions_.cols()), Matrix(B, 1), Matrix(B, obs_.cols()), Matrix(B, 1)};
    for (Eigen::Index i = 0; i < B; ++i) {
        const auto j = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
        out.obs.row(i) = obs_.row(j);
        out.actions.row(i) = actions_.row(j);
        out.rewards(i, 0) = rewards_(j);
        out.next_obs.row(i) = next_obs_.row(j);
        out.terminals(i, 0) = terminals_(j);
    }
    return out;
}

}  // namespace vdpo::nn
