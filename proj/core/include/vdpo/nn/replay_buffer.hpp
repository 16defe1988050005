#pragma once

#include <cstddef>
#include <span>

#include "vdpo/nn/autodiff.hpp"

namespace vdpo::nn {

struct Batch {
    Matrix obs;
    Matrix actions;
    Matrix rewards;    // B x 1
    Matrix next_obs;
    Matrix terminals;  // B x 1, 1 where the transition ended in a terminal state
};

/// Fixed-capacity ring buffer of (s, a, r, s', terminal) transitions.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t action_dim);

    void add(std::span<const double> obs, std::span<const double> action, double reward,
             std::span<const double> next_obs, bool terminal);

    /// `batch` distinct stored transitions, uniformly at random.
    Batch sample(std::size_t batch, Rng& rng) const;

    std::size_t size() const noexcept { return size_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t obs_dim() const noexcept { return static_cast<std::size_t>(obs_.cols()); }
    std::size_t action_dim() const noexcept { return static_cast<std::size_t>(actions_.cols()); }

private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;
    Matrix obs_;
    Matrix actions_;
    Eigen::VectorXd rewards_;
    Matrix next_obs_;
    Eigen::VectorXd terminals_;
};

}  // namespace vdpo::nn
