#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace vdpo::exact {

/// Anything the tabular solvers can iterate over: FiniteMdp, DelayedMdp and
/// SparseMdp all qualify.
template <class M>
concept TabularModel = requires(const M& m, std::size_t i) {
    { m.num_states() } -> std::convertible_to<std::size_t>;
    { m.num_actions() } -> std::convertible_to<std::size_t>;
    { m.discount() } -> std::convertible_to<double>;
    { m.reward(i, i) } -> std::convertible_to<double>;
    { m.initial_distribution() } -> std::convertible_to<std::span<const double>>;
    m.for_each_successor(i, i, [](std::size_t, double) {});
};

/// Row-stochastic matrix pi[s][a], stored row-major.
class PolicyTable {
public:
    PolicyTable() = default;
    PolicyTable(std::size_t num_states, std::size_t num_actions);

    static PolicyTable uniform(std::size_t num_states, std::size_t num_actions);
    static PolicyTable deterministic(std::span<const std::size_t> actions, std::size_t num_actions);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }

    double operator()(std::size_t s, std::size_t a) const { return probs_[s * num_actions_ + a]; }
    double& operator()(std::size_t s, std::size_t a) { return probs_[s * num_actions_ + a]; }

    std::span<const double> row(std::size_t s) const { return {probs_.data() + s * num_actions_, num_actions_}; }
    std::span<double> row(std::size_t s) { return {probs_.data() + s * num_actions_, num_actions_}; }

    /// Most probable action; lowest index on ties.
    std::size_t mode(std::size_t s) const;

    /// Throws ModelError unless every row is a distribution within `tol`.
    void validate(double tol = 1e-12) const;

    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<double> probs_;
};

struct ValueTable {
    std::vector<double> values;
    /// Q[s * A + a]; empty when not computed.
    std::vector<double> q;

    double q_value(std::size_t s, std::size_t a, std::size_t num_actions) const { return q[s * num_actions + a]; }
};

/// Explicit sparse model. Used for estimated (empirical) models.
class SparseMdp {
public:
    struct Entry {
        std::size_t next;
        double prob;
    };

    SparseMdp(std::size_t num_states, std::size_t num_actions, double discount, std::vector<double> initial);

    /// Replace row (s, a). Probabilities must sum to 1.
    void set_row(std::size_t s, std::size_t a, double reward, std::vector<Entry> entries);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double discount() const noexcept { return discount_; }
    double reward(std::size_t s, std::size_t a) const { return rewards_[s * num_actions_ + a]; }
    std::span<const double> initial_distribution() const noexcept { return initial_; }

    template <class Fn>
    void for_each_successor(std::size_t s, std::size_t a, Fn&& fn) const {
        for (const Entry& e : rows_[s * num_actions_ + a]) fn(e.next, e.prob);
    }

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    double discount_;
    std::vector<double> initial_;
    std::vector<double> rewards_;
    std::vector<std::vector<Entry>> rows_;
};

}  // namespace vdpo::exact
