#include "vdpo/exact/solvers.hpp"

namespace vdpo::exact {

PolicyTable::PolicyTable(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states), num_actions_(num_actions), probs_(num_states * num_actions, 0.0) {}

PolicyTable PolicyTable::uniform(std::size_t num_states, std::size_t num_actions) {
    PolicyTable pi(num_states, num_actions);
    std::fill(pi.probs_.begin(), pi.probs_.end(), 1.0 / static_cast<double>(num_actions));
    return pi;
}

PolicyTable PolicyTable::deterministic(std::span<const std::size_t> actions, std::size_t num_actions) {
    PolicyTable pi(actions.size(), num_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] >= num_actions) throw DimensionError("PolicyTable: action index out of range");
        pi(s, actions[s]) = 1.0;
    }
    return pi;
}

std::size_t PolicyTable::mode(std::size_t s) const {
    const auto r = row(s);
    return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

void PolicyTable::validate(double tol) const {
    for (std::size_t s = 0; s < num_states_; ++s) {
        double sum = 0.0;
        for (double p : row(s)) {
            if (!(p >= 0.0)) throw ModelError("PolicyTable: negative or NaN entry in row " + std::to_string(s));
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol) throw ModelError("PolicyTable: row " + std::to_string(s) + " does not sum to 1");
    }
}

SparseMdp::SparseMdp(std::size_t num_states, std::size_t num_actions, double discount, std::vector<double> initial)
    : num_states_(num_states),
      num_actions_(num_actions),
      discount_(discount),
      initial_(std::move(initial)),
      rewards_(num_states * num_actions, 0.0),
      rows_(num_states * num_actions) {
    if (initial_.size() != num_states_) throw DimensionError("SparseMdp: initial distribution has wrong size");
    if (!(discount_ > 0.0 && discount_ < 1.0)) throw ModelError("SparseMdp: discount must lie in (0, 1)");
    // Unset rows are absorbing self-loops with zero reward.
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) rows_[s * num_actions_ + a] = {Entry{s, 1.0}};
    }
}

void SparseMdp::set_row(std::size_t s, std::size_t a, double reward, std::vector<Entry> entries) {
    if (s >= num_states_ || a >= num_actions_) throw DimensionError("SparseMdp: row index out of range");
    double sum = 0.0;
    for (const Entry& e : entries) {
        if (e.next >= num_states_) throw DimensionError("SparseMdp: successor out of range");
        if (!(e.prob >= 0.0)) throw ModelError("SparseMdp: negative probability");
        sum += e.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ModelError("SparseMdp: row does not sum to 1");
    rewards_[s * num_actions_ + a] = reward;
    rows_[s * num_actions_ + a] = std::move(entries);
}

}  // namespace vdpo::exact
