#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vdpo/exact/solvers.hpp"
#include "vdpo/mdp/delayed_mdp.hpp"

namespace vdpo::exact {

/// pi_Delta(a|x) = sum_s b(s|x) pi(a|s) for every augmented x.
PolicyTable belief_mixture(const mdp::DelayedMdp& delayed, const PolicyTable& reference);

/// Solves the delay-free MDP by value iteration and projects its greedy policy
/// onto augmented states through the belief.
PolicyTable exact_vdpo(const mdp::FiniteMdp& mdp, std::size_t delay, double tol = 1e-10,
                       std::optional<std::vector<mdp::ActionIndex>> fill_actions = std::nullopt);

/// max_x TV(candidate(.|x), E_{b(.|x)}[pi*(.|s)]).
double fixed_point_residual(const mdp::FiniteMdp& mdp, std::size_t delay, const PolicyTable& candidate,
                            double tol = 1e-10);

/// sum_i p_i log(p_i / q_i); 0 log 0 = 0, +inf when q_i = 0 < p_i.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct ProjectionCheck {
    std::vector<double> minimizer;
    std::vector<double> mixture;
    double objective = 0.0;
    /// max_a |minimizer(a) - mixture(a)|.
    double gap = 0.0;
};

/// Grid search of q -> sum_s b(s) KL(reference(.|s) || q) over the simplex
/// with step 1/subdivisions. Supports 2 and 3 actions.
ProjectionCheck state_kl_projection_check(const PolicyTable& reference, const mdp::Belief& belief,
                                          std::size_t subdivisions = 1000);

/// J*_Delta for each requested delay.
///
/// Every delay is started from the same physical law: s_{-Delta} is drawn from
/// rho P_fill^(Delta_max - Delta), so each profile entry describes the same
/// process observed with a different lag.
std::vector<double> delay_performance_profile(const mdp::FiniteMdp& mdp, std::span<const std::size_t> delays,
                                              mdp::ActionIndex fill = 0, double tol = 1e-12);

}  // namespace vdpo::exact
