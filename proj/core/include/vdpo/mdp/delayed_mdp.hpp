#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vdpo/mdp/finite_mdp.hpp"

namespace vdpo::mdp {

/// x = (s_{t-Delta}, a_{t-Delta}, ..., a_{t-1}); buffer ordered oldest first.
struct AugmentedState {
    StateIndex base_state = 0;
    std::vector<ActionIndex> action_buffer;

    friend bool operator==(const AugmentedState&, const AugmentedState&) = default;
};

/// Distribution over base states, one entry per state.
struct Belief {
    std::vector<double> probs;
};

/// b(.|x): push the Dirac at x.base_state through the buffered actions.
Belief compute_belief(const FiniteMdp& mdp, const AugmentedState& x);

struct DelayedMdpOptions {
    std::size_t capacity = 1'000'000;
    /// Rewards and beliefs are materialised when |X| is at most this.
    std::size_t dense_threshold = 100'000;
    /// Law of s_{-Delta}; defaults to the base rho.
    std::optional<std::vector<double>> base_state_distribution;
};

/// Constant-delay augmented MDP over X = S x A^Delta.
///
/// Index layout is mixed radix with the base state most significant and the
/// newest action least significant:
///     index = s * A^Delta + sum_i buffer[i] * A^(Delta-1-i).
/// The initial distribution puts rho(s) on (s, fill_actions).
class DelayedMdp {
public:
    DelayedMdp(FiniteMdp base, std::size_t delay, std::vector<ActionIndex> fill_actions,
               DelayedMdpOptions options = {});

    const FiniteMdp& base() const noexcept { return base_; }
    std::size_t delay() const noexcept { return delay_; }
    const std::vector<ActionIndex>& fill_actions() const noexcept { return fill_; }
    bool is_dense() const noexcept { return dense_; }

    std::size_t num_states() const noexcept { return num_aug_; }
    std::size_t num_actions() const noexcept { return base_.num_actions(); }
    double discount() const noexcept { return base_.discount(); }
    std::span<const double> initial_distribution() const noexcept { return initial_; }

    std::size_t index_of(const AugmentedState& x) const;
    AugmentedState state_at(std::size_t index) const;

    StateIndex base_state_of(std::size_t index) const noexcept { return index / buffer_radix_; }
    /// Oldest buffered action of `index`, or `fallback` when Delta = 0.
    ActionIndex oldest_action(std::size_t index, ActionIndex fallback) const noexcept {
        return delay_ == 0 ? fallback : (index % buffer_radix_) / oldest_radix_;
    }
    /// Index of (next_base, b_1, ..., b_{Delta-1}, action).
    std::size_t shifted_index(std::size_t index, StateIndex next_base, ActionIndex action) const noexcept {
        if (delay_ == 0) return next_base;
        return next_base * buffer_radix_ + (index % oldest_radix_) * base_.num_actions() + action;
    }

    /// R_Delta(x, a) = sum_s b(s|x) R(s, a).
    double reward(std::size_t x, ActionIndex a) const;
    Belief belief(std::size_t x) const;
    /// Writes b(.|x) into `out`, which must have |S| entries.
    void belief_into(std::size_t x, std::span<double> out) const;

    /// fn(next_index, prob) for every successor with non-zero probability.
    template <class Fn>
    void for_each_successor(std::size_t x, ActionIndex a, Fn&& fn) const {
        const StateIndex s = base_state_of(x);
        const ActionIndex applied = oldest_action(x, a);
        const auto row = base_.transition_row(s, applied);
        for (std::size_t next = 0; next < row.size(); ++next) {
            if (row[next] != 0.0) fn(shifted_index(x, next, a), row[next]);
        }
    }

private:
    void check_index(std::size_t x) const;

    FiniteMdp base_;
    std::size_t delay_;
    std::vector<ActionIndex> fill_;
    std::size_t buffer_radix_ = 1;  // A^Delta
    std::size_t oldest_radix_ = 1;  // A^(Delta-1)
    std::size_t num_aug_ = 0;
    bool dense_ = false;
    std::vector<double> initial_;
    std::vector<double> rewards_;  // dense only, [x * A + a]
    std::vector<double> beliefs_;  // dense only, [x * S + s]
};

/// Default fill is action 0 at every buffer slot; pass `fill_actions` to override.
DelayedMdp build_delayed_mdp(const FiniteMdp& mdp, std::size_t delay,
                             std::optional<std::vector<ActionIndex>> fill_actions = std::nullopt,
                             DelayedMdpOptions options = {});

/// rho * P_a^k for a fixed action `a`.
std::vector<double> push_forward(const FiniteMdp& mdp, std::span<const double> dist, ActionIndex a,
                                 std::size_t steps);

}  // namespace vdpo::mdp
