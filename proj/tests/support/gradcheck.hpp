#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "vdpo/nn/autodiff.hpp"
#include "vdpo/nn/layers.hpp"

namespace vdpo::gradcheck {

struct GradCheck {
    double relative_error = 0.0;
    double analytic_norm = 0.0;
    std::size_t entries = 0;
};

/// Compares tape gradients of `loss` w.r.t. `params` with central differences.
/// `loss(tape)` must rebuild the graph from the current parameter values.
inline GradCheck gradient_check(const nn::ParamList& params, const std::function<nn::Var(nn::Tape&)>& loss,
                                double h = 1e-6) {
    nn::zero_grad(params);
    {
        nn::Tape tape;
        tape.backward(loss(tape));
    }
    double diff2 = 0.0, a2 = 0.0, f2 = 0.0;
    GradCheck out;
    for (const auto& p : params) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) {
            const double saved = p->value(i);
            p->value(i) = saved + h;
            double up;
            {
                nn::Tape t;
                up = loss(t).scalar();
            }
            p->value(i) = saved - h;
            double down;
            {
                nn::Tape t;
                down = loss(t).scalar();
            }
            p->value(i) = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = p->grad(i);
            diff2 += (an - fd) * (an - fd);
            a2 += an * an;
            f2 += fd * fd;
            ++out.entries;
        }
    }
    out.analytic_norm = std::sqrt(a2);
    out.relative_error = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(f2), 1e-12});
    return out;
}

}  // namespace vdpo::gradcheck
