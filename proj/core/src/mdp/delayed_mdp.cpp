#include "vdpo/mdp/delayed_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vdpo/common/error.hpp"

namespace vdpo::mdp {

namespace {

void propagate(const FiniteMdp& mdp, std::span<const double> from, ActionIndex a, std::span<double> to) {
    std::fill(to.begin(), to.end(), 0.0);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        if (from[s] == 0.0) continue;
        const auto row = mdp.transition_row(s, a);
        for (std::size_t next = 0; next < row.size(); ++next) to[next] += from[s] * row[next];
    }
}

void belief_of(const FiniteMdp& mdp, StateIndex s, std::span<const ActionIndex> actions, std::span<double> out) {
    std::vector<double> cur(mdp.num_states(), 0.0);
    std::vector<double> nxt(mdp.num_states(), 0.0);
    cur[s] = 1.0;
    for (ActionIndex a : actions) {
        propagate(mdp, cur, a, nxt);
        cur.swap(nxt);
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

}  // namespace

Belief compute_belief(const FiniteMdp& mdp, const AugmentedState& x) {
    if (x.base_state >= mdp.num_states()) {
        throw InvalidStateError("compute_belief: base state " + std::to_string(x.base_state) + " out of range");
    }
    for (ActionIndex a : x.action_buffer) {
        if (a >= mdp.num_actions()) {
            throw InvalidStateError("compute_belief: action " + std::to_string(a) + " out of range");
        }
    }
    Belief b{std::vector<double>(mdp.num_states())};
    belief_of(mdp, x.base_state, x.action_buffer, b.probs);
    return b;
}

std::vector<double> push_forward(const FiniteMdp& mdp, std::span<const double> dist, ActionIndex a,
                                 std::size_t steps) {
    if (dist.size() != mdp.num_states()) throw DimensionError("push_forward: distribution size mismatch");
    if (a >= mdp.num_actions()) throw InvalidStateError("push_forward: action out of range");
    std::vector<double> cur(dist.begin(), dist.end());
    std::vector<double> nxt(cur.size());
    for (std::size_t k = 0; k < steps; ++k) {
        propagate(mdp, cur, a, nxt);
        cur.swap(nxt);
    }
    return cur;
}

DelayedMdp::DelayedMdp(FiniteMdp base, std::size_t delay, std::vector<ActionIndex> fill_actions,
                       DelayedMdpOptions options)
    : base_(std::move(base)), delay_(delay), fill_(std::move(fill_actions)) {
    const std::size_t A = base_.num_actions();
    const std::size_t S = base_.num_states();
    if (fill_.size() != delay_) throw ModelError("DelayedMdp: fill buffer length must equal the delay");
    for (ActionIndex a : fill_) {
        if (a >= A) throw InvalidStateError("DelayedMdp: fill action out of range");
    }

    // |X| = |S| * A^Delta, checked against the cap before anything is allocated.
    std::size_t count = S;
    for (std::size_t i = 0; i < delay_; ++i) {
        if (count > options.capacity / A) {
            throw CapacityError("DelayedMdp: |S| * |A|^Delta exceeds capacity " + std::to_string(options.capacity));
        }
        count *= A;
        buffer_radix_ *= A;
    }
    if (count > options.capacity) {
        throw CapacityError("DelayedMdp: |S| * |A|^Delta exceeds capacity " + std::to_string(options.capacity));
    }
    oldest_radix_ = delay_ == 0 ? 1 : buffer_radix_ / A;
    num_aug_ = count;

    std::vector<double> start = options.base_state_distribution.value_or(
        std::vector<double>(base_.initial_distribution().begin(), base_.initial_distribution().end()));
    if (start.size() != S) throw DimensionError("DelayedMdp: base state distribution has wrong size");
    double total = 0.0;
    for (double p : start) {
        if (p < 0.0) throw ModelError("DelayedMdp: negative start probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ModelError("DelayedMdp: start distribution does not sum to 1");

    initial_.assign(num_aug_, 0.0);
    std::size_t fill_offset = 0;
    for (ActionIndex a : fill_) fill_offset = fill_offset * A + a;
    for (std::size_t s = 0; s < S; ++s) initial_[s * buffer_radix_ + fill_offset] = start[s];

    dense_ = num_aug_ <= options.dense_threshold;
    if (dense_) {
        beliefs_.assign(num_aug_ * S, 0.0);
        rewards_.assign(num_aug_ * A, 0.0);
        for (std::size_t x = 0; x < num_aug_; ++x) {
            const auto state = state_at(x);
            std::span<double> b(beliefs_.data() + x * S, S);
            belief_of(base_, state.base_state, state.action_buffer, b);
            for (std::size_t a = 0; a < A; ++a) {
                double r = 0.0;
                for (std::size_t s = 0; s < S; ++s) r += b[s] * base_.reward(s, a);
                rewards_[x * A + a] = r;
            }
        }
    }
}

void DelayedMdp::check_index(std::size_t x) const {
    if (x >= num_aug_) throw InvalidStateError("DelayedMdp: augmented index " + std::to_string(x) + " out of range");
}

std::size_t DelayedMdp::index_of(const AugmentedState& x) const {
    if (x.base_state >= base_.num_states()) throw InvalidStateError("DelayedMdp: base state out of range");
    if (x.action_buffer.size() != delay_) throw InvalidStateError("DelayedMdp: buffer length must equal the delay");
    std::size_t idx = x.base_state;
    for (ActionIndex a : x.action_buffer) {
        if (a >= base_.num_actions()) throw InvalidStateError("DelayedMdp: buffered action out of range");
        idx = idx * base_.num_actions() + a;
    }
    return idx;
}

AugmentedState DelayedMdp::state_at(std::size_t index) const {
    check_index(index);
    AugmentedState x;
    x.action_buffer.resize(delay_);
    std::size_t rest = index;
    for (std::size_t i = delay_; i-- > 0;) {
        x.action_buffer[i] = rest % base_.num_actions();
        rest /= base_.num_actions();
    }
    x.base_state = rest;
    return x;
}

double DelayedMdp::reward(std::size_t x, ActionIndex a) const {
    if (dense_) return rewards_[x * base_.num_actions() + a];
    const std::size_t S = base_.num_states();
    std::vector<double> b(S);
    belief_into(x, b);
    double r = 0.0;
    for (std::size_t s = 0; s < S; ++s) r += b[s] * base_.reward(s, a);
    return r;
}

void DelayedMdp::belief_into(std::size_t x, std::span<double> out) const {
    check_index(x);
    const std::size_t S = base_.num_states();
    if (out.size() != S) throw DimensionError("DelayedMdp: belief buffer has wrong size");
    if (dense_) {
        std::copy_n(beliefs_.data() + x * S, S, out.begin());
        return;
    }
    const auto state = state_at(x);
    belief_of(base_, state.base_state, state.action_buffer, out);
}

Belief DelayedMdp::belief(std::size_t x) const {
    Belief b{std::vector<double>(base_.num_states())};
    belief_into(x, b.probs);
    return b;
}

DelayedMdp build_delayed_mdp(const FiniteMdp& mdp, std::size_t delay,
                             std::optional<std::vector<ActionIndex>> fill_actions, DelayedMdpOptions options) {
    return DelayedMdp(mdp, delay, fill_actions.value_or(std::vector<ActionIndex>(delay, 0)), std::move(options));
}

}  // namespace vdpo::mdp
