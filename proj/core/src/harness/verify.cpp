#include "vdpo/harness/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "vdpo/common/rng.hpp"
#include "vdpo/envs/delay_wrapper.hpp"
#include "vdpo/exact/fixed_point.hpp"
#include "vdpo/exact/sample_complexity.hpp"

namespace vdpo::harness {

namespace {

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

/// b(s|x) by summing path probabilities over all of S^Delta.
std::vector<double> enumerate_belief(const mdp::FiniteMdp& m, const mdp::AugmentedState& x) {
    const std::size_t S = m.num_states();
    const std::size_t D = x.action_buffer.size();
    std::vector<double> out(S, 0.0);
    std::vector<std::size_t> path(D, 0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < D; ++i) total *= S;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < D; ++i) {
            path[i] = c % S;
            c /= S;
        }
        double p = 1.0;
        std::size_t prev = x.base_state;
        for (std::size_t i = 0; i < D; ++i) {
            p *= m.transition(prev, x.action_buffer[i], path[i]);
            prev = path[i];
        }
        out[D == 0 ? x.base_state : path[D - 1]] += p;
    }
    return out;
}

}  // namespace

CheckOutcome run_check(int id, std::string name, const std::function<void(CheckOutcome&)>& body) {
    CheckOutcome c;
    c.id = id;
    c.name = std::move(name);
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.passed = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return c;
}

std::string format_outcome(const CheckOutcome& c) {
    return fmt("[%s] %d %s: %s (%.1f s)", c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), c.detail.c_str(), c.seconds);
}

CheckOutcome check_belief_oracle(std::size_t instances, std::uint64_t seed_base) {
    return run_check(1, "belief oracle equivalence", [&](CheckOutcome& c) {
        double worst = 0.0;
        std::size_t checked = 0;
        for (std::size_t i = 0; i < instances; ++i) {
            Rng sizes(mix_seed(seed_base, 0xbe11 + i));
            const std::size_t S = 2 + sizes.uniform_int(3);
            const std::size_t A = 1 + sizes.uniform_int(3);
            const std::size_t D = 1 + sizes.uniform_int(3);
            const auto m = mdp::random_mdp(seed_base + i, S, A);
            const auto delayed = mdp::build_delayed_mdp(m, D);
            for (std::size_t xi = 0; xi < delayed.num_states(); ++xi) {
                const auto x = delayed.state_at(xi);
                const auto oracle = enumerate_belief(m, x);
                const auto direct = mdp::compute_belief(m, x).probs;
                const auto table = delayed.belief(xi).probs;
                for (std::size_t s = 0; s < S; ++s) {
                    worst = std::max({worst, std::abs(direct[s] - oracle[s]), std::abs(table[s] - oracle[s])});
                }
                ++checked;
            }
        }
        c.passed = worst <= 1e-12;
        c.detail = fmt("%zu instances, %zu augmented states, max |diff| = %.3g (tol 1e-12)", instances, checked, worst);
    });
}

CheckOutcome check_fixed_point(std::size_t instances, std::uint64_t seed_base) {
    return run_check(2, "belief-mixture fixed point", [&](CheckOutcome& c) {
        double worst_residual = 0.0;
        double worst_gap = 0.0;
        std::size_t grid_rows = 0;
        for (std::size_t i = 0; i < instances; ++i) {
            Rng sizes(mix_seed(seed_base, 0xf1 + i));
            const std::size_t S = 2 + sizes.uniform_int(3);
            const std::size_t A = i % 2 == 0 ? 2 : 3;
            const std::size_t D = 1 + sizes.uniform_int(3);
            const auto m = mdp::random_mdp(seed_base + 500 + i, S, A);
            const auto pi = exact::exact_vdpo(m, D);
            worst_residual = std::max(worst_residual, exact::fixed_point_residual(m, D, pi));
            if (A != 2) continue;
            const auto reference = exact::value_iteration(m, 1e-10).policy;
            const auto delayed = mdp::build_delayed_mdp(m, D);
            for (std::size_t x = 0; x < delayed.num_states(); ++x) {
                const auto check = exact::state_kl_projection_check(reference, delayed.belief(x), 1000);
                for (std::size_t a = 0; a < A; ++a) worst_gap = std::max(worst_gap, std::abs(check.minimizer[a] - pi(x, a)));
                ++grid_rows;
            }
        }
        c.passed = worst_residual <= 1e-12 && worst_gap <= 1e-3 + 1e-12;
        c.detail = fmt("%zu instances, max residual = %.3g (tol 1e-12); %zu grid rows, max gap = %.3g (tol 1e-3)",
                       instances, worst_residual, grid_rows, worst_gap);
    });
}

CheckOutcome check_monotonicity(std::size_t instances, std::uint64_t seed_base) {
    return run_check(3, "delay monotonicity", [&](CheckOutcome& c) {
        const std::vector<std::size_t> delays = {0, 1, 2, 3};
        std::size_t increases = 0;
        std::size_t non_constant = 0;
        double worst_increase = 0.0;
        double worst_spread = 0.0;
        for (std::size_t i = 0; i < instances; ++i) {
            Rng sizes(mix_seed(seed_base, 0x3a + i));
            const std::size_t S = 2 + sizes.uniform_int(3);
            const std::size_t A = 2 + sizes.uniform_int(2);
            const auto j = exact::delay_performance_profile(mdp::random_mdp(seed_base + 1000 + i, S, A), delays);
            bool bad = false;
            for (std::size_t k = 1; k < j.size(); ++k) {
                worst_increase = std::max(worst_increase, j[k] - j[k - 1]);
                bad |= j[k] > j[k - 1] + 1e-8;
            }
            increases += bad ? 1 : 0;
            const auto jd = exact::delay_performance_profile(mdp::random_deterministic_mdp(seed_base + 1000 + i, S, A), delays);
            const auto [lo, hi] = std::minmax_element(jd.begin(), jd.end());
            worst_spread = std::max(worst_spread, *hi - *lo);
            non_constant += *hi - *lo > 1e-8 ? 1 : 0;
        }
        c.passed = increases == 0 && non_constant == 0;
        c.detail = fmt("%zu random: %zu with an increase (max step %.3g); %zu deterministic: %zu non-constant (max spread %.3g)",
                       instances, increases, worst_increase, instances, non_constant, worst_spread);
    });
}

CheckOutcome check_sample_complexity(std::size_t instances, std::uint64_t seed_base) {
    return run_check(4, "sample-complexity direction", [&](CheckOutcome& c) {
        std::size_t wins = 0;
        std::size_t common_wins = 0;
        for (std::size_t i = 0; i < instances; ++i) {
            const std::uint64_t seed = seed_base + i;
            const auto m = mdp::random_mdp(seed, 4, 2);
            const auto [mbpi, vdpo] = exact::sample_complexity_experiment(m, 3, 0.1, seed);
            wins += vdpo.samples <= mbpi.samples ? 1 : 0;
            exact::SampleComplexityOptions common;
            common.criterion = exact::SuccessCriterion::delayed_return;
            const auto [mbpi2, vdpo2] = exact::sample_complexity_experiment(m, 3, 0.1, seed, common);
            common_wins += vdpo2.success && vdpo2.samples <= mbpi2.samples ? 1 : 0;
        }
        const double share = static_cast<double>(wins) / static_cast<double>(instances);
        c.passed = share >= 0.8;
        c.detail = fmt("VDPO <= MBPI samples on %zu/%zu (%.0f%%, need >= 80%%); common delayed-return criterion: %zu/%zu",
                       wins, instances, 100.0 * share, common_wins, instances);
    });
}

CheckOutcome check_stochastic_delay(std::size_t steps, std::size_t delay, std::uint64_t seed) {
    return run_check(8, "stochastic-delay statistics", [&](CheckOutcome& c) {
        envs::DelayConfig cfg;
        cfg.mode = envs::DelayMode::stochastic;
        cfg.max_delay = delay;
        envs::DelayedEnv env(envs::make_env("pendulum"), cfg, mix_seed(seed, 8));
        Rng rng(mix_seed(seed, 9));
        std::uint64_t episode = 0;
        env.reset(episode++);
        for (std::size_t t = 0; t < steps; ++t) {
            const double a = rng.uniform(-2.0, 2.0);
            if (env.step(std::span<const double>(&a, 1)).done) env.reset(episode++);
        }
        const double freq = static_cast<double>(env.full_delay_draws()) / static_cast<double>(env.delay_draws());
        c.passed = freq >= 0.89 && freq <= 0.91 && env.invariant_violations() == 0;
        c.detail = fmt("%llu draws, P(delay = %zu) = %.4f (window [0.89, 0.91]), invariant violations = %llu",
                       static_cast<unsigned long long>(env.delay_draws()), delay, freq,
                       static_cast<unsigned long long>(env.invariant_violations()));
    });
}

std::vector<CheckOutcome> run_exact_checks() {
    return {check_belief_oracle(), check_fixed_point(), check_monotonicity(), check_sample_complexity(),
            check_stochastic_delay()};
}

}  // namespace vdpo::harness
