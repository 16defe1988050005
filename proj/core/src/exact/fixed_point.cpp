#include "vdpo/exact/fixed_point.hpp"

#include <limits>

namespace vdpo::exact {

PolicyTable belief_mixture(const mdp::DelayedMdp& delayed, const PolicyTable& reference) {
    const auto& base = delayed.base();
    if (reference.num_states() != base.num_states() || reference.num_actions() != base.num_actions()) {
        throw DimensionError("belief_mixture: reference policy does not match the base MDP");
    }
    const std::size_t S = base.num_states();
    const std::size_t A = base.num_actions();
    PolicyTable out(delayed.num_states(), A);
    std::vector<double> b(S);
    for (std::size_t x = 0; x < delayed.num_states(); ++x) {
        delayed.belief_into(x, b);
        auto row = out.row(x);
        for (std::size_t s = 0; s < S; ++s) {
            if (b[s] == 0.0) continue;
            for (std::size_t a = 0; a < A; ++a) row[a] += b[s] * reference(s, a);
        }
    }
    return out;
}

PolicyTable exact_vdpo(const mdp::FiniteMdp& mdp, std::size_t delay, double tol,
                       std::optional<std::vector<mdp::ActionIndex>> fill_actions) {
    const auto delayed = mdp::build_delayed_mdp(mdp, delay, std::move(fill_actions));
    const auto reference = value_iteration(mdp, tol).policy;
    return belief_mixture(delayed, reference);
}

double fixed_point_residual(const mdp::FiniteMdp& mdp, std::size_t delay, const PolicyTable& candidate,
                            double tol) {
    const auto delayed = mdp::build_delayed_mdp(mdp, delay);
    if (candidate.num_states() != delayed.num_states() || candidate.num_actions() != delayed.num_actions()) {
        throw DimensionError("fixed_point_residual: candidate must cover every augmented state");
    }
    const auto target = belief_mixture(delayed, value_iteration(mdp, tol).policy);
    double worst = 0.0;
    for (std::size_t x = 0; x < delayed.num_states(); ++x) {
        double tv = 0.0;
        for (std::size_t a = 0; a < delayed.num_actions(); ++a) tv += std::abs(candidate(x, a) - target(x, a));
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DimensionError("kl_divergence: size mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return kl;
}

ProjectionCheck state_kl_projection_check(const PolicyTable& reference, const mdp::Belief& belief,
                                          std::size_t subdivisions) {
    const std::size_t A = reference.num_actions();
    if (A != 2 && A != 3) throw DimensionError("state_kl_projection_check: only 2 or 3 actions are supported");
    if (belief.probs.size() != reference.num_states()) {
        throw DimensionError("state_kl_projection_check: belief does not match the reference policy");
    }
    if (subdivisions == 0) throw DimensionError("state_kl_projection_check: subdivisions must be positive");

    ProjectionCheck out;
    out.mixture.assign(A, 0.0);
    for (std::size_t s = 0; s < belief.probs.size(); ++s) {
        for (std::size_t a = 0; a < A; ++a) out.mixture[a] += belief.probs[s] * reference(s, a);
    }

    auto objective = [&](std::span<const double> q) {
        double total = 0.0;
        for (std::size_t s = 0; s < belief.probs.size(); ++s) {
            if (belief.probs[s] == 0.0) continue;
            const double kl = kl_divergence(reference.row(s), q);
            if (std::isinf(kl)) return kl;
            total += belief.probs[s] * kl;
        }
        return total;
    };

    const double h = 1.0 / static_cast<double>(subdivisions);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> q(A);
    for (std::size_t i = 0; i <= subdivisions; ++i) {
        const std::size_t j_max = A == 2 ? 0 : subdivisions - i;
        for (std::size_t j = 0; j <= j_max; ++j) {
            q[0] = static_cast<double>(i) * h;
            if (A == 2) {
                q[1] = static_cast<double>(subdivisions - i) * h;
            } else {
                q[1] = static_cast<double>(j) * h;
                q[2] = static_cast<double>(subdivisions - i - j) * h;
            }
            const double value = objective(q);
            if (value < best) {
                best = value;
                out.minimizer = q;
            }
        }
    }
    out.objective = best;
    for (std::size_t a = 0; a < A; ++a) out.gap = std::max(out.gap, std::abs(out.minimizer[a] - out.mixture[a]));
    return out;
}

std::vector<double> delay_performance_profile(const mdp::FiniteMdp& mdp, std::span<const std::size_t> delays,
                                              mdp::ActionIndex fill, double tol) {
    std::vector<double> out;
    if (delays.empty()) return out;
    const std::size_t max_delay = *std::max_element(delays.begin(), delays.end());
    out.reserve(delays.size());
    for (std::size_t delay : delays) {
        mdp::DelayedMdpOptions options;
        options.base_state_distribution = mdp::push_forward(mdp, mdp.initial_distribution(), fill, max_delay - delay);
        const mdp::DelayedMdp delayed(mdp, delay, std::vector<mdp::ActionIndex>(delay, fill), std::move(options));
        const auto solved = value_iteration(delayed, tol);
        out.push_back(expected_return(delayed, solved.table.values));
    }
    return out;
}

}  // namespace vdpo::exact
