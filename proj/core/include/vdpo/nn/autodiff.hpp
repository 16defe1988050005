#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vdpo/common/rng.hpp"

namespace vdpo::nn {

using Matrix = Eigen::MatrixXd;

/// Trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
    Parameter(std::string name, Matrix init);

    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;

    void zero_grad() { grad.setZero(); }
};

using ParamPtr = std::shared_ptr<Parameter>;
using ParamList = std::vector<ParamPtr>;

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    const Matrix& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }

private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode tape. Build a graph with the free functions below, then call
/// backward() on a 1x1 result; gradients of trainable parameters accumulate
/// into Parameter::grad.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    /// A parameter leaf. With `trainable` false it behaves as a constant.
    Var parameter(const ParamPtr& p, bool trainable = true);

    void backward(Var root);

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    /// Gradient buffer of a node, zero-initialised on first access.
    Matrix& grad(std::size_t id);

    Var push(Matrix value, bool requires_grad, std::function<void()> backward);
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::function<void()> backward;
    };
    std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
/// x W + b with b a 1 x out row broadcast over rows.
Var linear(Var x, Var w, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a + row broadcast over rows.
Var add_row(Var a, Var row);
/// a * s with s a 1x1 node, broadcast.
Var mul_scalar(Var a, Var s);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var minimum(Var a, Var b);

Var relu(Var a);
Var tanh(Var a);
Var gelu(Var a);
Var exp(Var a);
Var log(Var a);
Var softplus(Var a);
Var square(Var a);

Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
/// Row selection: out row i = a row index[i].
Var gather_rows(Var a, const std::vector<Eigen::Index>& index);

Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
/// Inverted dropout. Identity when p == 0 or rng is null.
Var dropout(Var x, double p, Rng* rng);
/// Rows grouped as sequences of length T; adds pos (T x d) to every sequence.
Var add_positional(Var x, Var pos);

/// Causal multi-head scaled dot-product attention over row blocks of length
/// `seq_len`: position i attends to positions 0..i of its own sequence.
/// Dropout with probability p is applied to the attention weights.
Var causal_attention(Var q, Var k, Var v, Eigen::Index seq_len, Eigen::Index heads, double p, Rng* rng);

/// Copy of a value cut from the graph.
Var detach(Var a);

}  // namespace vdpo::nn
