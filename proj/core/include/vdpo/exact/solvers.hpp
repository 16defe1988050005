#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "vdpo/common/error.hpp"
#include "vdpo/exact/tabular.hpp"

namespace vdpo::exact {

/// Two Q-values closer than this are treated as tied in greedy extraction.
inline constexpr double kTieTolerance = 1e-12;

/// Models up to this many states are evaluated with a dense LU solve.
inline constexpr std::size_t kDirectSolveLimit = 2048;

struct SolveResult {
    ValueTable table;
    PolicyTable policy;
    std::size_t iterations = 0;
    /// ||T V - V||_inf at the returned V.
    double residual = 0.0;
};

template <TabularModel M>
std::vector<double> bellman_q(const M& m, std::span<const double> v) {
    const std::size_t n = m.num_states();
    const std::size_t na = m.num_actions();
    const double gamma = m.discount();
    std::vector<double> q(n * na);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < na; ++a) {
            double acc = 0.0;
            m.for_each_successor(s, a, [&](std::size_t next, double p) { acc += p * v[next]; });
            q[s * na + a] = m.reward(s, a) + gamma * acc;
        }
    }
    return q;
}

/// Deterministic greedy policy; an action displaces the incumbent only when it
/// is better by more than kTieTolerance, so ties go to the lowest index.
inline PolicyTable greedy_policy(std::span<const double> q, std::size_t num_states, std::size_t num_actions) {
    std::vector<std::size_t> best(num_states, 0);
    for (std::size_t s = 0; s < num_states; ++s) {
        std::size_t arg = 0;
        for (std::size_t a = 1; a < num_actions; ++a) {
            if (q[s * num_actions + a] > q[s * num_actions + arg] + kTieTolerance) arg = a;
        }
        best[s] = arg;
    }
    return PolicyTable::deterministic(best, num_actions);
}

/// Iterates V <- max_a Q(V) until ||T V - V||_inf <= tol.
template <TabularModel M>
SolveResult value_iteration(const M& m, double tol = 1e-10, std::size_t max_iterations = 1'000'000) {
    if (!(tol > 0.0)) throw ModelError("value_iteration: tol must be positive");
    const std::size_t n = m.num_states();
    const std::size_t na = m.num_actions();
    std::vector<double> v(n, 0.0);
    std::vector<double> q;
    SolveResult out;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        q = bellman_q(m, v);
        double residual = 0.0;
        std::vector<double> tv(n);
        for (std::size_t s = 0; s < n; ++s) {
            double best = q[s * na];
            for (std::size_t a = 1; a < na; ++a) best = std::max(best, q[s * na + a]);
            tv[s] = best;
            residual = std::max(residual, std::abs(best - v[s]));
        }
        out.iterations = it + 1;
        out.residual = residual;
        if (residual <= tol) break;
        v.swap(tv);
    }
    if (out.residual > tol) throw NumericError("value_iteration: did not converge");
    out.policy = greedy_policy(q, n, na);
    out.table.values = std::move(v);
    out.table.q = std::move(q);
    return out;
}

namespace detail {

template <TabularModel M>
Eigen::MatrixXd dense_policy_transition(const M& m, const PolicyTable& pi) {
    const std::size_t n = m.num_states();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m.num_actions(); ++a) {
            const double w = pi(s, a);
            if (w == 0.0) continue;
            m.for_each_successor(s, a, [&](std::size_t next, double prob) {
                p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(next)) += w * prob;
            });
        }
    }
    return p;
}

template <TabularModel M>
void check_policy(const M& m, const PolicyTable& pi, const char* who) {
    if (pi.num_states() != m.num_states() || pi.num_actions() != m.num_actions()) {
        throw DimensionError(std::string(who) + ": policy is " + std::to_string(pi.num_states()) + "x" +
                             std::to_string(pi.num_actions()) + ", model is " + std::to_string(m.num_states()) +
                             "x" + std::to_string(m.num_actions()));
    }
}

}  // namespace detail

/// V^pi with Q^pi. Direct solve of (I - gamma P_pi) V = r_pi on small models,
/// fixed-point iteration to ||T_pi V - V||_inf <= tol otherwise.
template <TabularModel M>
ValueTable policy_evaluation(const M& m, const PolicyTable& pi, double tol = 1e-12) {
    detail::check_policy(m, pi, "policy_evaluation");
    const std::size_t n = m.num_states();
    const std::size_t na = m.num_actions();
    std::vector<double> r_pi(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < na; ++a) r_pi[s] += pi(s, a) * m.reward(s, a);
    }
    std::vector<double> v(n, 0.0);
    if (n <= kDirectSolveLimit) {
        const Eigen::MatrixXd p = detail::dense_policy_transition(m, pi);
        const Eigen::MatrixXd lhs =
            Eigen::MatrixXd::Identity(p.rows(), p.cols()) - m.discount() * p;
        const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(r_pi.data(), p.rows());
        const Eigen::VectorXd sol = lhs.partialPivLu().solve(rhs);
        for (std::size_t s = 0; s < n; ++s) v[s] = sol(static_cast<Eigen::Index>(s));
    } else {
        std::vector<double> nv(n);
        for (std::size_t it = 0;; ++it) {
            const auto q = bellman_q(m, v);
            double residual = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                double acc = 0.0;
                for (std::size_t a = 0; a < na; ++a) acc += pi(s, a) * q[s * na + a];
                nv[s] = acc;
                residual = std::max(residual, std::abs(acc - v[s]));
            }
            v.swap(nv);
            if (residual <= tol) break;
            if (it > 10'000'000) throw NumericError("policy_evaluation: did not converge");
        }
    }
    ValueTable out;
    out.q = bellman_q(m, v);
    out.values = std::move(v);
    return out;
}

/// rho . V
template <TabularModel M>
double expected_return(const M& m, std::span<const double> values) {
    const auto rho = m.initial_distribution();
    double j = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s) j += rho[s] * values[s];
    return j;
}

/// Howard policy iteration from the all-zeros policy; improvement keeps the
/// incumbent action unless another is better by more than kTieTolerance.
template <TabularModel M>
SolveResult policy_iteration(const M& m, std::size_t max_iterations = 10'000) {
    const std::size_t n = m.num_states();
    const std::size_t na = m.num_actions();
    std::vector<std::size_t> actions(n, 0);
    SolveResult out;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        out.policy = PolicyTable::deterministic(actions, na);
        out.table = policy_evaluation(m, out.policy);
        out.iterations = it + 1;
        bool changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t best = actions[s];
            for (std::size_t a = 0; a < na; ++a) {
                if (out.table.q[s * na + a] > out.table.q[s * na + best] + kTieTolerance) best = a;
            }
            if (best != actions[s]) {
                actions[s] = best;
                changed = true;
            }
        }
        if (!changed) {
            double residual = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                double best = out.table.q[s * na];
                for (std::size_t a = 1; a < na; ++a) best = std::max(best, out.table.q[s * na + a]);
                residual = std::max(residual, std::abs(best - out.table.values[s]));
            }
            out.residual = residual;
            return out;
        }
    }
    throw NumericError("policy_iteration: no convergence within iteration limit");
}

/// d_pi = (1 - gamma) rho^T (I - gamma P_pi)^{-1}, normalised to sum 1.
template <TabularModel M>
std::vector<double> occupancy_measure(const M& m, const PolicyTable& pi) {
    detail::check_policy(m, pi, "occupancy_measure");
    const std::size_t n = m.num_states();
    const double gamma = m.discount();
    const auto rho = m.initial_distribution();
    std::vector<double> d(n, 0.0);
    if (n <= kDirectSolveLimit) {
        const Eigen::MatrixXd p = detail::dense_policy_transition(m, pi);
        const Eigen::MatrixXd lhs =
            (Eigen::MatrixXd::Identity(p.rows(), p.cols()) - gamma * p).transpose();
        Eigen::VectorXd rhs(p.rows());
        for (std::size_t s = 0; s < n; ++s) rhs(static_cast<Eigen::Index>(s)) = (1.0 - gamma) * rho[s];
        const Eigen::VectorXd sol = lhs.partialPivLu().solve(rhs);
        for (std::size_t s = 0; s < n; ++s) d[s] = std::max(0.0, sol(static_cast<Eigen::Index>(s)));
    } else {
        std::vector<double> nd(n);
        for (std::size_t it = 0;; ++it) {
            for (std::size_t s = 0; s < n; ++s) nd[s] = (1.0 - gamma) * rho[s];
            for (std::size_t s = 0; s < n; ++s) {
                if (d[s] == 0.0) continue;
                for (std::size_t a = 0; a < m.num_actions(); ++a) {
                    const double w = gamma * d[s] * pi(s, a);
                    if (w == 0.0) continue;
                    m.for_each_successor(s, a, [&](std::size_t next, double prob) { nd[next] += w * prob; });
                }
            }
            double diff = 0.0;
            for (std::size_t s = 0; s < n; ++s) diff += std::abs(nd[s] - d[s]);
            d.swap(nd);
            if (diff <= 1e-14 || it > 10'000'000) break;
        }
    }
    double total = 0.0;
    for (double x : d) total += x;
    for (double& x : d) x /= total;
    return d;
}

}  // namespace vdpo::exact
