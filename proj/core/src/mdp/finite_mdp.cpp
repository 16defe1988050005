#include "vdpo/mdp/finite_mdp.hpp"

#include <cmath>
#include <string>

#include "vdpo/common/error.hpp"
#include "vdpo/common/rng.hpp"

namespace vdpo::mdp {

namespace {

void check_distribution(std::span<const double> probs, const std::string& what) {
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) throw ModelError(what + ": negative or non-finite entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > FiniteMdp::kStochasticTolerance) {
        throw ModelError(what + ": sums to " + std::to_string(sum));
    }
}

}  // namespace

FiniteMdp::FiniteMdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
                     std::vector<double> reward, double discount, std::vector<double> initial_dist)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount),
      initial_(std::move(initial_dist)) {
    if (num_states_ == 0 || num_actions_ == 0) throw ModelError("FiniteMdp: empty state or action set");
    if (transition_.size() != num_states_ * num_actions_ * num_states_) {
        throw ModelError("FiniteMdp: transition tensor has wrong size");
    }
    if (reward_.size() != num_states_ * num_actions_) throw ModelError("FiniteMdp: reward matrix has wrong size");
    if (initial_.size() != num_states_) throw ModelError("FiniteMdp: initial distribution has wrong size");
    if (!(discount_ > 0.0 && discount_ < 1.0)) throw ModelError("FiniteMdp: discount must lie in (0, 1)");
    for (double r : reward_) {
        if (!std::isfinite(r)) throw ModelError("FiniteMdp: non-finite reward");
    }
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) {
            check_distribution(transition_row(s, a),
                               "FiniteMdp: P[" + std::to_string(s) + "][" + std::to_string(a) + "]");
        }
    }
    check_distribution(initial_, "FiniteMdp: initial distribution");
}

bool FiniteMdp::is_deterministic() const {
    for (double p : transition_) {
        if (p != 0.0 && p != 1.0) return false;
    }
    return true;
}

double FiniteMdp::max_abs_reward() const {
    double m = 0.0;
    for (double r : reward_) m = std::max(m, std::abs(r));
    return m;
}

FiniteMdp FiniteMdp::with_initial_distribution(std::vector<double> initial_dist) const {
    return FiniteMdp(num_states_, num_actions_, transition_, reward_, discount_, std::move(initial_dist));
}

FiniteMdp FiniteMdp::with_discount(double discount) const {
    return FiniteMdp(num_states_, num_actions_, transition_, reward_, discount, initial_);
}

FiniteMdp random_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions, double discount) {
    Rng rng(seed);
    std::vector<double> transition(num_states * num_actions * num_states);
    for (std::size_t row = 0; row < num_states * num_actions; ++row) {
        double total = 0.0;
        for (std::size_t j = 0; j < num_states; ++j) {
            const double e = rng.exponential();
            transition[row * num_states + j] = e;
            total += e;
        }
        // Dirichlet(1): normalised i.i.d. Exp(1). Normalise so the row sums to 1 to the ulp.
        double sum = 0.0;
        for (std::size_t j = 0; j < num_states; ++j) {
            transition[row * num_states + j] /= total;
            sum += transition[row * num_states + j];
        }
        transition[row * num_states + num_states - 1] += 1.0 - sum;
    }
    std::vector<double> reward(num_states * num_actions);
    for (double& r : reward) r = rng.uniform();
    std::vector<double> initial(num_states, 1.0 / static_cast<double>(num_states));
    return FiniteMdp(num_states, num_actions, std::move(transition), std::move(reward), discount,
                     std::move(initial));
}

FiniteMdp random_deterministic_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions,
                                   double discount) {
    Rng rng(mix_seed(seed, 0xde7));
    std::vector<double> transition(num_states * num_actions * num_states, 0.0);
    for (std::size_t row = 0; row < num_states * num_actions; ++row) {
        transition[row * num_states + rng.uniform_int(num_states)] = 1.0;
    }
    std::vector<double> reward(num_states * num_actions);
    for (double& r : reward) r = rng.uniform();
    std::vector<double> initial(num_states, 1.0 / static_cast<double>(num_states));
    return FiniteMdp(num_states, num_actions, std::move(transition), std::move(reward), discount,
                     std::move(initial));
}

}  // namespace vdpo::mdp
