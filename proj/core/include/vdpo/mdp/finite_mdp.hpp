#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vdpo::mdp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Tabular MDP <S, A, P, R, gamma, rho>.
///
/// `transition` is stored flat as P[(s * A + a) * S + s'] and `reward` as
/// R[s * A + a]. The constructor validates every invariant (rows stochastic
/// within 1e-12, rho a distribution, 0 < gamma < 1) and throws ModelError.
class FiniteMdp {
public:
    static constexpr double kStochasticTolerance = 1e-12;

    FiniteMdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
              std::vector<double> reward, double discount, std::vector<double> initial_dist);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double discount() const noexcept { return discount_; }

    double transition(StateIndex s, ActionIndex a, StateIndex next) const {
        return transition_[(s * num_actions_ + a) * num_states_ + next];
    }
    std::span<const double> transition_row(StateIndex s, ActionIndex a) const {
        return {transition_.data() + (s * num_actions_ + a) * num_states_, num_states_};
    }
    double reward(StateIndex s, ActionIndex a) const { return reward_[s * num_actions_ + a]; }
    std::span<const double> initial_distribution() const noexcept { return initial_; }

    std::span<const double> transition_data() const noexcept { return transition_; }
    std::span<const double> reward_data() const noexcept { return reward_; }

    /// Calls `fn(next, prob)` for every next state with non-zero probability.
    template <class Fn>
    void for_each_successor(StateIndex s, ActionIndex a, Fn&& fn) const {
        const auto row = transition_row(s, a);
        for (std::size_t next = 0; next < num_states_; ++next) {
            if (row[next] != 0.0) fn(next, row[next]);
        }
    }

    /// True when every transition row is a Dirac.
    bool is_deterministic() const;

    /// Largest |R(s,a)|.
    double max_abs_reward() const;

    FiniteMdp with_initial_distribution(std::vector<double> initial_dist) const;
    FiniteMdp with_discount(double discount) const;

    friend bool operator==(const FiniteMdp&, const FiniteMdp&) = default;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> transition_;
    std::vector<double> reward_;
    double discount_;
    std::vector<double> initial_;
};

/// Random test instance: transition rows ~ Dirichlet(1), rewards ~ U[0,1],
/// uniform rho. Deterministic in `seed` on every platform.
FiniteMdp random_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions,
                     double discount = 0.9);

/// Random instance whose transition rows are Diracs on uniformly drawn states.
FiniteMdp random_deterministic_mdp(std::uint64_t seed, std::size_t num_states,
                                   std::size_t num_actions, double discount = 0.9);

}  // namespace vdpo::mdp
