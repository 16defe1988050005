#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vdpo::envs {

/// x_t = (delayed state, action buffer). In stochastic mode the buffer is
/// left-padded with the fill action and `freshness_lag` counts the real entries.
struct AugmentedObservation {
    std::vector<double> delayed_state;
    std::vector<std::vector<double>> action_buffer;
    std::size_t freshness_lag = 0;

    /// delayed_state followed by the buffered actions, oldest first.
    std::vector<double> flatten() const;
};

/// Per-episode record of true states s_0..s_T, actions and rewards of steps
/// 0..T-1, and the step at which each state was revealed to the agent.
///
/// Pair positions (episode, t) for behaviour cloning are indexed as soon as
/// s_t is revealed, so sampling never sees unrevealed states.
class TrajectoryStore {
public:
    static constexpr std::int64_t kUnrevealed = -1;

    struct Episode {
        std::vector<double> states;   // (T+1) x state_dim
        std::vector<double> actions;  // T x action_dim
        std::vector<double> rewards;  // T
        std::vector<std::int64_t> reveal_times;  // T+1
        bool finished = false;

        std::size_t length() const noexcept { return rewards.size(); }
    };

    TrajectoryStore(std::size_t state_dim, std::size_t action_dim, std::size_t delay);

    std::size_t state_dim() const noexcept { return state_dim_; }
    std::size_t action_dim() const noexcept { return action_dim_; }
    std::size_t delay() const noexcept { return delay_; }

    /// Opens an episode with s_0; returns its index.
    std::size_t begin_episode(std::span<const double> initial_state);
    /// Appends (a_t, r_t, s_{t+1}) to the open episode.
    void record_step(std::span<const double> action, double reward, std::span<const double> next_state);
    /// Marks s_k (k <= index) of the open episode as revealed at episode step `when`.
    void reveal_through(std::size_t index, std::int64_t when);
    /// Closes the open episode and reveals every remaining state at its final step.
    void end_episode();

    const std::vector<Episode>& episodes() const noexcept { return episodes_; }
    std::span<const double> state(std::size_t episode, std::size_t t) const;
    std::span<const double> action(std::size_t episode, std::size_t t) const;
    std::size_t total_steps() const noexcept { return total_steps_; }

    /// (episode, t) positions with t >= delay whose s_t has been revealed.
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pair_positions() const noexcept { return pairs_; }

    /// Binary file: "VDPOTRAJ", u32 version, u32 state_dim, u32 action_dim,
    /// u32 delay, u64 record count, then one fixed-width little-endian record
    /// per stored state: u64 episode, u64 t, f64[state_dim] state,
    /// f64[action_dim] action, f64 reward, u8 has_action, u8 done, i64 reveal.
    void save(const std::string& path) const;
    static TrajectoryStore load(const std::string& path);

    friend bool operator==(const TrajectoryStore&, const TrajectoryStore&);

private:
    Episode& open_episode();

    std::size_t state_dim_;
    std::size_t action_dim_;
    std::size_t delay_;
    std::vector<Episode> episodes_;
    std::vector<std::size_t> revealed_upto_;  // per episode: count of revealed states
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
    std::size_t total_steps_ = 0;
};

struct BcPair {
    std::size_t episode = 0;
    std::size_t t = 0;
    AugmentedObservation x;
    /// s_{t-Delta+1}, ..., s_t.
    std::vector<std::vector<double>> targets;
};

/// x_t = (s_{t-Delta}, a_{t-Delta..t-1}) with targets s_{t-Delta+1..t} for all
/// revealed positions t >= Delta.
std::vector<BcPair> bc_pairs(const TrajectoryStore& store, std::size_t delay);

/// The pair at one position, without the reveal check.
BcPair make_bc_pair(const TrajectoryStore& store, std::size_t episode, std::size_t t, std::size_t delay);

}  // namespace vdpo::envs
