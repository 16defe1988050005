#include "vdpo/envs/trajectory_store.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

#include "vdpo/common/error.hpp"

namespace vdpo::envs {

namespace {

constexpr std::array<char, 8> kMagic = {'V', 'D', 'P', 'O', 'T', 'R', 'A', 'J'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ProtocolError("TrajectoryStore: truncated file");
    return value;
}

}  // namespace

std::vector<double> AugmentedObservation::flatten() const {
    std::vector<double> out(delayed_state);
    for (const auto& a : action_buffer) out.insert(out.end(), a.begin(), a.end());
    return out;
}

TrajectoryStore::TrajectoryStore(std::size_t state_dim, std::size_t action_dim, std::size_t delay)
    : state_dim_(state_dim), action_dim_(action_dim), delay_(delay) {
    if (state_dim == 0 || action_dim == 0) throw DimensionError("TrajectoryStore: dimensions must be positive");
}

TrajectoryStore::Episode& TrajectoryStore::open_episode() {
    if (episodes_.empty() || episodes_.back().finished) throw ProtocolError("TrajectoryStore: no open episode");
    return episodes_.back();
}

std::size_t TrajectoryStore::begin_episode(std::span<const double> initial_state) {
    if (!episodes_.empty() && !episodes_.back().finished) end_episode();
    if (initial_state.size() != state_dim_) throw DimensionError("TrajectoryStore: state has wrong size");
    Episode ep;
    ep.states.assign(initial_state.begin(), initial_state.end());
    ep.reveal_times.push_back(kUnrevealed);
    episodes_.push_back(std::move(ep));
    revealed_upto_.push_back(0);
    return episodes_.size() - 1;
}

void TrajectoryStore::record_step(std::span<const double> action, double reward, std::span<const double> next_state) {
    auto& ep = open_episode();
    if (action.size() != action_dim_) throw DimensionError("TrajectoryStore: action has wrong size");
    if (next_state.size() != state_dim_) throw DimensionError("TrajectoryStore: state has wrong size");
    ep.actions.insert(ep.actions.end(), action.begin(), action.end());
    ep.rewards.push_back(reward);
    ep.states.insert(ep.states.end(), next_state.begin(), next_state.end());
    ep.reveal_times.push_back(kUnrevealed);
    ++total_steps_;
}

void TrajectoryStore::reveal_through(std::size_t index, std::int64_t when) {
    auto& ep = open_episode();
    const std::size_t e = episodes_.size() - 1;
    if (index >= ep.reveal_times.size()) throw ProtocolError("TrajectoryStore: revealing a state not yet generated");
    for (std::size_t k = revealed_upto_[e]; k <= index; ++k) {
        ep.reveal_times[k] = when;
        if (k >= delay_) pairs_.emplace_back(static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(k));
    }
    revealed_upto_[e] = std::max(revealed_upto_[e], index + 1);
}

void TrajectoryStore::end_episode() {
    auto& ep = open_episode();
    reveal_through(ep.reveal_times.size() - 1, static_cast<std::int64_t>(ep.length()));
    ep.finished = true;
}

std::span<const double> TrajectoryStore::state(std::size_t episode, std::size_t t) const {
    return {episodes_.at(episode).states.data() + t * state_dim_, state_dim_};
}

std::span<const double> TrajectoryStore::action(std::size_t episode, std::size_t t) const {
    return {episodes_.at(episode).actions.data() + t * action_dim_, action_dim_};
}

void TrajectoryStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ProtocolError("TrajectoryStore: cannot write '" + path + "'");
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(state_dim_));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(action_dim_));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(delay_));
    std::uint64_t records = 0;
    for (const auto& ep : episodes_) records += ep.reveal_times.size();
    put<std::uint64_t>(out, records);
    for (std::size_t e = 0; e < episodes_.size(); ++e) {
        const auto& ep = episodes_[e];
        for (std::size_t t = 0; t < ep.reveal_times.size(); ++t) {
            const bool has_action = t < ep.length();
            put<std::uint64_t>(out, e);
            put<std::uint64_t>(out, t);
            for (double v : state(e, t)) put<double>(out, v);
            for (std::size_t i = 0; i < action_dim_; ++i) put<double>(out, has_action ? ep.actions[t * action_dim_ + i] : 0.0);
            put<double>(out, has_action ? ep.rewards[t] : 0.0);
            put<std::uint8_t>(out, has_action ? 1 : 0);
            put<std::uint8_t>(out, ep.finished && !has_action ? 1 : 0);
            put<std::int64_t>(out, ep.reveal_times[t]);
        }
    }
}

TrajectoryStore TrajectoryStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProtocolError("TrajectoryStore: cannot open '" + path + "'");
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ProtocolError("TrajectoryStore: bad magic");
    if (get<std::uint32_t>(in) != kVersion) throw ProtocolError("TrajectoryStore: unsupported version");
    const auto sd = get<std::uint32_t>(in);
    const auto ad = get<std::uint32_t>(in);
    const auto delay = get<std::uint32_t>(in);
    const auto records = get<std::uint64_t>(in);
    TrajectoryStore store(sd, ad, delay);
    std::vector<double> s(sd), a(ad);
    for (std::uint64_t r = 0; r < records; ++r) {
        const auto e = get<std::uint64_t>(in);
        const auto t = get<std::uint64_t>(in);
        for (auto& v : s) v = get<double>(in);
        for (auto& v : a) v = get<double>(in);
        const double reward = get<double>(in);
        const bool has_action = get<std::uint8_t>(in) != 0;
        const bool done = get<std::uint8_t>(in) != 0;
        const auto reveal = get<std::int64_t>(in);
        if (t == 0) {
            if (e != store.episodes_.size()) throw ProtocolError("TrajectoryStore: records out of order");
            store.episodes_.emplace_back();
            store.revealed_upto_.push_back(0);
            store.episodes_.back().states.assign(s.begin(), s.end());
        } else {
            auto& ep = store.episodes_.at(e);
            ep.states.insert(ep.states.end(), s.begin(), s.end());
        }
        auto& ep = store.episodes_.back();
        ep.reveal_times.push_back(reveal);
        if (reveal != kUnrevealed) {
            store.revealed_upto_.back() = t + 1;
            if (t >= delay) store.pairs_.emplace_back(static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(t));
        }
        if (has_action) {
            ep.actions.insert(ep.actions.end(), a.begin(), a.end());
            ep.rewards.push_back(reward);
            ++store.total_steps_;
        }
        if (done) ep.finished = true;
    }
    return store;
}

bool operator==(const TrajectoryStore& a, const TrajectoryStore& b) {
    if (a.state_dim_ != b.state_dim_ || a.action_dim_ != b.action_dim_ || a.delay_ != b.delay_) return false;
    if (a.episodes_.size() != b.episodes_.size()) return false;
    for (std::size_t e = 0; e < a.episodes_.size(); ++e) {
        const auto& x = a.episodes_[e];
        const auto& y = b.episodes_[e];
        if (x.states != y.states || x.actions != y.actions || x.rewards != y.rewards ||
            x.reveal_times != y.reveal_times || x.finished != y.finished) {
            return false;
        }
    }
    return true;
}

BcPair make_bc_pair(const TrajectoryStore& store, std::size_t episode, std::size_t t, std::size_t delay) {
    if (t < delay) throw ProtocolError("make_bc_pair: t must be at least the delay");
    BcPair pair;
    pair.episode = episode;
    pair.t = t;
    const auto base = store.state(episode, t - delay);
    pair.x.delayed_state.assign(base.begin(), base.end());
    pair.x.freshness_lag = delay;
    for (std::size_t k = t - delay; k < t; ++k) {
        const auto a = store.action(episode, k);
        pair.x.action_buffer.emplace_back(a.begin(), a.end());
    }
    for (std::size_t k = t - delay + 1; k <= t; ++k) {
        const auto s = store.state(episode, k);
        pair.targets.emplace_back(s.begin(), s.end());
    }
    return pair;
}

std::vector<BcPair> bc_pairs(const TrajectoryStore& store, std::size_t delay) {
    std::vector<BcPair> out;
    const auto& episodes = store.episodes();
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        const auto& ep = episodes[e];
        for (std::size_t t = delay; t < ep.reveal_times.size(); ++t) {
            if (ep.reveal_times[t] == TrajectoryStore::kUnrevealed) break;
            out.push_back(make_bc_pair(store, e, t, delay));
        }
    }
    return out;
}

}  // namespace vdpo::envs
