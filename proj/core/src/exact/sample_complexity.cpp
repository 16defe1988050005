#include "vdpo/exact/sample_complexity.hpp"

#include <deque>
#include <limits>

#include "vdpo/common/rng.hpp"
#include "vdpo/common/text.hpp"
#include "vdpo/exact/fixed_point.hpp"
#include "vdpo/exact/solvers.hpp"
#include "vdpo/mdp/delayed_mdp.hpp"

namespace vdpo::exact {

namespace {

using mdp::DelayedMdp;

double sup_gap(std::span<const double> optimal, std::span<const double> achieved) {
    double worst = 0.0;
    for (std::size_t i = 0; i < optimal.size(); ++i) worst = std::max(worst, optimal[i] - achieved[i]);
    return worst;
}

struct ModelStage {
    PolicyTable policy;
    std::uint64_t samples = 0;
    double epsilon_hat = std::numeric_limits<double>::infinity();
    bool success = false;
};

/// Model-based policy iteration against the generative model of `model`
/// (a delayed MDP; Delta = 0 is the plain MDP). Each query at (x, a) returns a
/// successor x' and a reward R(s_t, a) with s_t drawn from the belief.
/// N samples per pair, doubling from 1.
ModelStage model_based_stage(const DelayedMdp& model, double epsilon, bool use_return_gap, std::uint64_t cap,
                             Rng& rng) {
    const auto& base = model.base();
    const std::size_t n = model.num_states();
    const std::size_t A = model.num_actions();
    const std::size_t S = base.num_states();
    const std::size_t delay = model.delay();

    const auto optimal = value_iteration(model, 1e-12);
    const double j_opt = expected_return(model, optimal.table.values);

    std::vector<std::uint64_t> counts(n * A * S, 0);
    std::vector<double> reward_sums(n * A, 0.0);
    ModelStage out;
    std::uint64_t per_pair = 0;
    for (;;) {
        const std::uint64_t add = std::max<std::uint64_t>(per_pair, 1);
        if ((per_pair + add) * n * A > cap) return out;
        for (std::size_t x = 0; x < n; ++x) {
            const auto state = model.state_at(x);
            for (std::size_t a = 0; a < A; ++a) {
                for (std::uint64_t k = 0; k < add; ++k) {
                    std::size_t cur = state.base_state;
                    std::size_t next_base = 0;
                    for (std::size_t i = 0; i < delay; ++i) {
                        cur = rng.categorical(base.transition_row(cur, state.action_buffer[i]));
                        if (i == 0) next_base = cur;
                    }
                    if (delay == 0) next_base = rng.categorical(base.transition_row(cur, a));
                    ++counts[(x * A + a) * S + next_base];
                    reward_sums[x * A + a] += base.reward(cur, a);
                }
            }
        }
        per_pair += add;

        SparseMdp estimate(n, A, model.discount(),
                           std::vector<double>(model.initial_distribution().begin(), model.initial_distribution().end()));
        const double inv = 1.0 / static_cast<double>(per_pair);
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t a = 0; a < A; ++a) {
                std::vector<SparseMdp::Entry> entries;
                for (std::size_t s = 0; s < S; ++s) {
                    const auto c = counts[(x * A + a) * S + s];
                    if (c) entries.push_back({model.shifted_index(x, s, a), static_cast<double>(c) * inv});
                }
                estimate.set_row(x, a, reward_sums[x * A + a] * inv, std::move(entries));
            }
        }
        out.policy = policy_iteration(estimate).policy;
        out.samples = per_pair * n * A;
        const auto achieved = policy_evaluation(model, out.policy);
        out.epsilon_hat = use_return_gap ? std::max(0.0, j_opt - expected_return(model, achieved.values))
                                         : std::max(0.0, sup_gap(optimal.table.values, achieved.values));
        if (out.epsilon_hat <= epsilon) {
            out.success = true;
            return out;
        }
    }
}

struct CloneStage {
    PolicyTable policy;
    std::uint64_t demonstrations = 0;
    double epsilon_hat = std::numeric_limits<double>::infinity();
    bool success = false;
};

/// Behaviour cloning of E_b[demonstrator] onto augmented states.
///
/// Demonstrations come from rollouts of the current clone; each real step
/// yields one pair (x_t, a ~ demonstrator(.|s_t)). Episodes end with
/// probability 1 - gamma per step; the Delta warm-up steps after a reset are
/// not counted. The clone is a per-x Laplace (add-1) frequency estimate.
CloneStage behaviour_cloning_stage(const DelayedMdp& delayed, const PolicyTable& demonstrator, double target_return,
                                   double j_opt, double epsilon, bool use_return_gap, std::uint64_t budget,
                                   mdp::ActionIndex fill, Rng& rng) {
    const auto& base = delayed.base();
    const std::size_t n = delayed.num_states();
    const std::size_t A = delayed.num_actions();
    const std::size_t delay = delayed.delay();

    std::vector<std::uint64_t> demos(n * A, 0);
    auto clone = [&] {
        PolicyTable pi(n, A);
        for (std::size_t x = 0; x < n; ++x) {
            std::uint64_t total = 0;
            for (std::size_t a = 0; a < A; ++a) total += demos[x * A + a];
            for (std::size_t a = 0; a < A; ++a) {
                pi(x, a) = static_cast<double>(demos[x * A + a] + 1) / static_cast<double>(total + A);
            }
        }
        return pi;
    };

    CloneStage out;
    std::uint64_t collected = 0;
    for (std::uint64_t target = 1;; target *= 2) {
        if (target > budget) return out;
        const PolicyTable behaviour = clone();
        while (collected < target) {
            // Reset: s_{-Delta} ~ rho, then the fill actions run forward to s_0.
            std::deque<std::size_t> history;
            std::size_t s = rng.categorical(base.initial_distribution());
            history.push_back(s);
            for (std::size_t i = 0; i < delay; ++i) {
                s = rng.categorical(base.transition_row(s, fill));
                history.push_back(s);
            }
            std::size_t x = delayed.index_of({history.front(), std::vector<mdp::ActionIndex>(delay, fill)});
            while (collected < target) {
                const std::size_t a = rng.categorical(behaviour.row(x));
                ++demos[x * A + rng.categorical(demonstrator.row(s))];
                ++collected;
                s = rng.categorical(base.transition_row(s, a));
                history.push_back(s);
                history.pop_front();
                x = delayed.shifted_index(x, history.front(), a);
                if (rng.uniform() >= delayed.discount()) break;
            }
        }
        out.policy = clone();
        out.demonstrations = collected;
        const double j = expected_return(delayed, policy_evaluation(delayed, out.policy).values);
        out.epsilon_hat = std::max(0.0, (use_return_gap ? j_opt : target_return) - j);
        if (out.epsilon_hat <= epsilon) {
            out.success = true;
            return out;
        }
    }
}

}  // namespace

std::pair<SampleBudgetReport, SampleBudgetReport> sample_complexity_experiment(
    const mdp::FiniteMdp& mdp, std::size_t delay, double epsilon, std::uint64_t seed,
    const SampleComplexityOptions& options) {
    const bool return_gap = options.criterion == SuccessCriterion::delayed_return;
    const auto delayed = mdp::build_delayed_mdp(mdp, delay, std::vector<mdp::ActionIndex>(delay, options.fill));
    const auto undelayed = mdp::build_delayed_mdp(mdp, 0);
    const double j_opt = expected_return(delayed, value_iteration(delayed, 1e-12).table.values);
    auto value_gap = [&](const PolicyTable& pi) {
        return j_opt - expected_return(delayed, policy_evaluation(delayed, pi).values);
    };

    SampleBudgetReport mbpi{.method = "mbpi", .epsilon = epsilon};
    {
        Rng rng(mix_seed(seed, 1));
        auto stage = model_based_stage(delayed, epsilon, return_gap, options.sample_cap, rng);
        mbpi.samples = mbpi.model_samples = stage.samples;
        mbpi.epsilon_hat = stage.epsilon_hat;
        mbpi.success = stage.success;
        if (stage.policy.num_states() != 0) mbpi.value_gap = value_gap(stage.policy);
    }

    SampleBudgetReport vdpo{.method = "vdpo", .epsilon = epsilon};
    {
        // Same stream as the MBPI arm so both arms coincide exactly at Delta = 0.
        Rng rng(mix_seed(seed, 1));
        auto stage = model_based_stage(undelayed, epsilon, return_gap && delay == 0, options.sample_cap, rng);
        vdpo.model_samples = vdpo.samples = stage.samples;
        vdpo.epsilon_hat = stage.epsilon_hat;
        vdpo.success = stage.success;
        if (stage.success && delay > 0) {
            Rng bc_rng(mix_seed(seed, 2));
            const auto mixture = belief_mixture(delayed, stage.policy);
            const double target = expected_return(delayed, policy_evaluation(delayed, mixture).values);
            auto clone = behaviour_cloning_stage(delayed, stage.policy, target, j_opt, epsilon, return_gap,
                                                 options.sample_cap - stage.samples, options.fill, bc_rng);
            vdpo.demonstration_samples = clone.demonstrations;
            vdpo.samples = stage.samples + clone.demonstrations;
            vdpo.epsilon_hat = clone.epsilon_hat;
            vdpo.success = clone.success;
            if (clone.policy.num_states() != 0) vdpo.value_gap = value_gap(clone.policy);
        } else if (delay == 0 && stage.policy.num_states() != 0) {
            vdpo.value_gap = value_gap(stage.policy);
        }
    }
    return {mbpi, vdpo};
}

std::string sample_complexity_csv_header() { return "seed,delay,epsilon,arm,samples,epsilon_hat,success"; }

std::string sample_complexity_csv_row(std::uint64_t seed, std::size_t delay, const SampleBudgetReport& report) {
    return std::to_string(seed) + ',' + std::to_string(delay) + ',' + format_double(report.epsilon) + ',' +
           report.method + ',' + std::to_string(report.samples) + ',' + format_double(report.epsilon_hat) + ',' +
           (report.success ? "1" : "0");
}

}  // namespace vdpo::exact
