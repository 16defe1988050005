#include <gtest/gtest.h>

#include "../support/gradcheck.hpp"
#include "vdpo/common/error.hpp"
#include "vdpo/nn/layers.hpp"

using namespace vdpo;
using namespace vdpo::nn;

namespace {

struct Fixture {
    Rng rng{7};
    ParamPtr a = normal_param("a", 4, 3, 1.0, rng);
    ParamPtr b = normal_param("b", 4, 3, 1.0, rng);
    ParamPtr w = normal_param("w", 3, 5, 1.0, rng);
    ParamPtr row = normal_param("row", 1, 3, 1.0, rng);
    ParamPtr s = normal_param("s", 1, 1, 1.0, rng);
    Matrix weights4x3 = standard_weights(4, 3);
    Matrix weights4x5 = standard_weights(4, 5);

    Matrix standard_weights(Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
        return m;
    }
};

/// sum(op * C) so that every output entry carries a distinct weight.
Var weigh(Tape& t, Var x, const Matrix& c) { return sum(mul(x, t.constant(c))); }

}  // namespace

TEST(Autodiff, ElementwiseOpsMatchFiniteDifferences) {
    Fixture f;
    const std::vector<std::pair<const char*, std::function<Var(Tape&, Var, Var)>>> ops = {
        {"add", [](Tape&, Var x, Var y) { return add(x, y); }},
        {"sub", [](Tape&, Var x, Var y) { return sub(x, y); }},
        {"mul", [](Tape&, Var x, Var y) { return mul(x, y); }},
        {"tanh", [](Tape&, Var x, Var) { return tanh(x); }},
        {"gelu", [](Tape&, Var x, Var) { return gelu(x); }},
        {"exp", [](Tape&, Var x, Var) { return exp(x); }},
        {"log", [](Tape&, Var x, Var) { return log(add_scalar(square(x), 0.5)); }},
        {"softplus", [](Tape&, Var x, Var) { return softplus(x); }},
        {"relu", [](Tape&, Var x, Var) { return relu(x); }},
        {"minimum", [](Tape&, Var x, Var y) { return minimum(x, y); }},
        {"scale", [](Tape&, Var x, Var) { return add_scalar(scale(x, -2.5), 3.0); }},
    };
    for (const auto& [name, op] : ops) {
        const auto r = gradcheck::gradient_check({f.a, f.b}, [&](Tape& t) {
            return weigh(t, op(t, t.parameter(f.a), t.parameter(f.b)), f.weights4x3);
        });
        EXPECT_LE(r.relative_error, 1e-6) << name;
        EXPECT_GT(r.analytic_norm, 0.0) << name;
    }
}

TEST(Autodiff, StructuralOpsMatchFiniteDifferences) {
    Fixture f;
    auto check = [&](const char* name, const ParamList& ps, const std::function<Var(Tape&)>& loss) {
        const auto r = gradcheck::gradient_check(ps, loss);
        EXPECT_LE(r.relative_error, 1e-6) << name;
    };
    check("matmul", {f.a, f.w}, [&](Tape& t) { return weigh(t, matmul(t.parameter(f.a), t.parameter(f.w)), f.weights4x5); });
    auto bias = normal_param("bias", 1, 5, 1.0, f.rng);
    check("linear", {f.a, f.w, bias}, [&](Tape& t) {
        return weigh(t, linear(t.parameter(f.a), t.parameter(f.w), t.parameter(bias)), f.weights4x5);
    });
    check("add_row", {f.a, f.row}, [&](Tape& t) { return weigh(t, add_row(t.parameter(f.a), t.parameter(f.row)), f.weights4x3); });
    check("mul_scalar", {f.a, f.s}, [&](Tape& t) { return weigh(t, mul_scalar(t.parameter(f.a), t.parameter(f.s)), f.weights4x3); });
    check("mean", {f.a}, [&](Tape& t) { return mean(square(t.parameter(f.a))); });
    check("row_sum", {f.a}, [&](Tape& t) { return weigh(t, row_sum(t.parameter(f.a)), f.weights4x3.col(0)); });
    check("concat_slice", {f.a, f.b}, [&](Tape& t) {
        Var c = concat_cols({t.parameter(f.a), t.parameter(f.b)});
        return weigh(t, slice_cols(c, 2, 3), f.weights4x3);
    });
    check("gather_rows", {f.a}, [&](Tape& t) { return weigh(t, gather_rows(t.parameter(f.a), {3, 0, 0, 2}), f.weights4x3); });
    check("layer_norm", {f.a, f.row}, [&](Tape& t) {
        Var beta = t.constant(Matrix::Constant(1, 3, 0.1));
        return weigh(t, layer_norm(t.parameter(f.a), t.parameter(f.row), beta), f.weights4x3);
    });
    auto pos = normal_param("pos", 2, 3, 1.0, f.rng);
    check("add_positional", {f.a, pos}, [&](Tape& t) {
        return weigh(t, add_positional(t.parameter(f.a), t.parameter(pos)), f.weights4x3);
    });
}

TEST(Autodiff, CausalAttentionMatchesFiniteDifferences) {
    Rng rng(3);
    auto q = normal_param("q", 6, 4, 1.0, rng);
    auto k = normal_param("k", 6, 4, 1.0, rng);
    auto v = normal_param("v", 6, 4, 1.0, rng);
    Matrix c(6, 4);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.normal();
    for (Eigen::Index heads : {1, 2}) {
        const auto r = gradcheck::gradient_check({q, k, v}, [&](Tape& t) {
            return weigh(t, causal_attention(t.parameter(q), t.parameter(k), t.parameter(v), 3, heads, 0.0, nullptr), c);
        });
        EXPECT_LE(r.relative_error, 1e-6) << heads;
    }
}

TEST(Autodiff, CausalAttentionWithDropoutMatchesFixedMask) {
    Rng rng(4);
    auto q = normal_param("q", 4, 2, 1.0, rng);
    auto k = normal_param("k", 4, 2, 1.0, rng);
    auto v = normal_param("v", 4, 2, 1.0, rng);
    Matrix c = Matrix::Ones(4, 2);
    // The same seed reproduces the dropout mask on every evaluation.
    const auto r = gradcheck::gradient_check({q, k, v}, [&](Tape& t) {
        Rng mask(99);
        return weigh(t, causal_attention(t.parameter(q), t.parameter(k), t.parameter(v), 2, 1, 0.3, &mask), c);
    });
    EXPECT_LE(r.relative_error, 1e-6);
}

TEST(Autodiff, CausalAttentionFirstPositionCopiesValue) {
    Tape t;
    Matrix q = Matrix::Random(3, 2), k = Matrix::Random(3, 2), v = Matrix::Random(3, 2);
    const Matrix out = causal_attention(t.constant(q), t.constant(k), t.constant(v), 3, 1, 0.0, nullptr).value();
    EXPECT_NEAR((out.row(0) - v.row(0)).norm(), 0.0, 1e-15);
}

TEST(Autodiff, FrozenParameterReceivesNoGradient) {
    Rng rng(1);
    auto p = normal_param("p", 2, 2, 1.0, rng);
    Tape t;
    Var loss = sum(square(t.parameter(p, false)));
    t.backward(loss);
    EXPECT_EQ(p->grad.norm(), 0.0);
}

TEST(Autodiff, GradientsAccumulateAcrossBackwardCalls) {
    auto p = constant_param("p", 1, 1, 3.0);
    for (int i = 0; i < 2; ++i) {
        Tape t;
        t.backward(square(t.parameter(p)));
    }
    EXPECT_DOUBLE_EQ(p->grad(0, 0), 12.0);
}

TEST(Autodiff, ShapeErrorsThrow) {
    Tape t;
    Var a = t.constant(Matrix::Zero(2, 3));
    Var b = t.constant(Matrix::Zero(3, 2));
    EXPECT_THROW(add(a, b), DimensionError);
    EXPECT_THROW(t.backward(a), DimensionError);
    EXPECT_THROW(causal_attention(a, a, a, 4, 1, 0.0, nullptr), DimensionError);
}

TEST(Autodiff, DropoutIsIdentityWithoutRng) {
    Tape t;
    Matrix m = Matrix::Random(3, 3);
    EXPECT_EQ(dropout(t.constant(m), 0.5, nullptr).value(), m);
}

TEST(Layers, AdamMovesAgainstGradientAndSoftUpdateInterpolates) {
    auto p = constant_param("p", 1, 1, 1.0);
    p->grad(0, 0) = 2.0;
    Adam opt(AdamConfig{0.1});
    opt.step({p});
    EXPECT_NEAR(p->value(0, 0), 1.0 - 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
    auto q = constant_param("q", 1, 1, 0.0);
    soft_update({p}, {q}, 0.25);
    EXPECT_NEAR(q->value(0, 0), 0.25 * p->value(0, 0), 1e-15);
}

TEST(Layers, LinearUsesFanInUniformInit) {
    Rng rng(0);
    Linear l("l", 16, 8, rng);
    EXPECT_LE(l.weight->value.cwiseAbs().maxCoeff(), 0.25);
    EXPECT_LE(l.bias->value.cwiseAbs().maxCoeff(), 0.25);
    EXPECT_EQ(l.weight->value.rows(), 16);
    EXPECT_EQ(l.weight->value.cols(), 8);
}
