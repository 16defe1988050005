#include "vdpo/nn/autodiff.hpp"

#include <cmath>
#include <numbers>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

Parameter::Parameter(std::string n, Matrix init)
    : name(std::move(n)),
      value(std::move(init)),
      grad(Matrix::Zero(value.rows(), value.cols())),
      adam_m(Matrix::Zero(value.rows(), value.cols())),
      adam_v(Matrix::Zero(value.rows(), value.cols())) {}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::push(Matrix value, bool requires_grad, std::function<void()> backward) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward)});
    return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, {}); }

Var Tape::parameter(const ParamPtr& p, bool trainable) {
    if (!trainable) return constant(p->value);
    const std::size_t id = nodes_.size();
    return push(p->value, true, [this, id, p] { p->grad += grad(id); });
}

void Tape::backward(Var root) {
    if (root.tape() != this) throw DimensionError("backward: variable belongs to another tape");
    if (value(root.id()).size() != 1) throw DimensionError("backward: root must be a scalar");
    grad(root.id()).setOnes();
    for (std::size_t i = root.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
        n.backward();
    }
}

namespace {

Tape& same_tape(Var a, Var b) {
    if (a.tape() == nullptr || a.tape() != b.tape()) throw DimensionError("autodiff: operands on different tapes");
    return *a.tape();
}

void check_same_shape(Var a, Var b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

/// Elementwise unary op: f gives the value, df(x, y) the local derivative.
template <class F, class DF>
Var unary(Var a, F f, DF df) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    Matrix out = a.value().unaryExpr(f);
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io, df] {
        const Matrix& x = t.value(ia);
        const Matrix& y = t.value(io);
        t.grad(ia).array() += t.grad(io).array() * x.binaryExpr(y, df).array();
    });
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    const std::size_t ia = a.id(), ib = b.id();
    Matrix out = a.value() * b.value();
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ib), [&t, ia, ib, io] {
        const Matrix& g = t.grad(io);
        if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
        if (t.requires_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
    });
}

Var linear(Var x, Var w, Var b) {
    Tape& t = same_tape(x, w);
    same_tape(x, b);
    if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) throw DimensionError("linear: shape mismatch");
    const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
    Matrix out = x.value() * w.value();
    out.rowwise() += b.value().row(0);
    const std::size_t io = t.size();
    const bool rg = t.requires_grad(ix) || t.requires_grad(iw) || t.requires_grad(ib);
    return t.push(std::move(out), rg, [&t, ix, iw, ib, io] {
        const Matrix& g = t.grad(io);
        if (t.requires_grad(ix)) t.grad(ix).noalias() += g * t.value(iw).transpose();
        if (t.requires_grad(iw)) t.grad(iw).noalias() += t.value(ix).transpose() * g;
        if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
    });
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    check_same_shape(a, b, "add");
    const std::size_t ia = a.id(), ib = b.id();
    Matrix out = a.value() + b.value();
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ib), [&t, ia, ib, io] {
        if (t.requires_grad(ia)) t.grad(ia) += t.grad(io);
        if (t.requires_grad(ib)) t.grad(ib) += t.grad(io);
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    check_same_shape(a, b, "sub");
    const std::size_t ia = a.id(), ib = b.id();
    Matrix out = a.value() - b.value();
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ib), [&t, ia, ib, io] {
        if (t.requires_grad(ia)) t.grad(ia) += t.grad(io);
        if (t.requires_grad(ib)) t.grad(ib) -= t.grad(io);
    });
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    check_same_shape(a, b, "mul");
    const std::size_t ia = a.id(), ib = b.id();
    Matrix out = a.value().cwiseProduct(b.value());
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ib), [&t, ia, ib, io] {
        const Matrix& g = t.grad(io);
        if (t.requires_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
        if (t.requires_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
    });
}

Var add_row(Var a, Var row) {
    Tape& t = same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) throw DimensionError("add_row: row must be 1 x cols");
    const std::size_t ia = a.id(), ir = row.id();
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ir), [&t, ia, ir, io] {
        if (t.requires_grad(ia)) t.grad(ia) += t.grad(io);
        if (t.requires_grad(ir)) t.grad(ir) += t.grad(io).colwise().sum();
    });
}

Var mul_scalar(Var a, Var s) {
    Tape& t = same_tape(a, s);
    if (s.rows() != 1 || s.cols() != 1) throw DimensionError("mul_scalar: scale must be 1x1");
    const std::size_t ia = a.id(), is = s.id();
    Matrix out = a.value() * s.scalar();
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(is), [&t, ia, is, io] {
        const Matrix& g = t.grad(io);
        if (t.requires_grad(ia)) t.grad(ia) += g * t.value(is)(0, 0);
        if (t.requires_grad(is)) t.grad(is)(0, 0) += g.cwiseProduct(t.value(ia)).sum();
    });
}

Var scale(Var a, double c) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    Matrix out = a.value() * c;
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io, c] { t.grad(ia) += t.grad(io) * c; });
}

Var add_scalar(Var a, double c) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    Matrix out = a.value().array() + c;
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io] { t.grad(ia) += t.grad(io); });
}

Var minimum(Var a, Var b) {
    Tape& t = same_tape(a, b);
    check_same_shape(a, b, "minimum");
    const std::size_t ia = a.id(), ib = b.id();
    Matrix out = a.value().cwiseMin(b.value());
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ib), [&t, ia, ib, io] {
        const Matrix& g = t.grad(io);
        const auto take_a = (t.value(ia).array() <= t.value(ib).array()).cast<double>();
        if (t.requires_grad(ia)) t.grad(ia).array() += g.array() * take_a;
        if (t.requires_grad(ib)) t.grad(ib).array() += g.array() * (1.0 - take_a);
    });
}

Var relu(Var a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
    return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var gelu(Var a) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return unary(
        a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
        [](double x, double) { return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x); });
}

Var exp(Var a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
    return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var softplus(Var a) {
    return unary(
        a, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
        [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var square(Var a) {
    return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sum(Var a) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io] { t.grad(ia).array() += t.grad(io)(0, 0); });
}

Var mean(Var a) {
    const double n = static_cast<double>(a.value().size());
    return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    Matrix out = a.value().rowwise().sum();
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io] {
        t.grad(ia).colwise() += t.grad(io).col(0);
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no inputs");
    Tape& t = *parts.front().tape();
    Eigen::Index cols = 0;
    bool rg = false;
    std::vector<std::size_t> ids;
    for (const Var& p : parts) {
        same_tape(parts.front(), p);
        if (p.rows() != parts.front().rows()) throw DimensionError("concat_cols: row counts differ");
        cols += p.cols();
        rg = rg || t.requires_grad(p.id());
        ids.push_back(p.id());
    }
    Matrix out(parts.front().rows(), cols);
    Eigen::Index c = 0;
    for (const Var& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
    }
    const std::size_t io = t.size();
    return t.push(std::move(out), rg, [&t, ids, io] {
        const Matrix& g = t.grad(io);
        Eigen::Index c0 = 0;
        for (std::size_t id : ids) {
            const Eigen::Index w = t.value(id).cols();
            if (t.requires_grad(id)) t.grad(id) += g.middleCols(c0, w);
            c0 += w;
        }
    });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
    Tape& t = *a.tape();
    if (start < 0 || count < 0 || start + count > a.cols()) throw DimensionError("slice_cols: range out of bounds");
    const std::size_t ia = a.id();
    Matrix out = a.value().middleCols(start, count);
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io, start, count] {
        t.grad(ia).middleCols(start, count) += t.grad(io);
    });
}

Var gather_rows(Var a, const std::vector<Eigen::Index>& index) {
    Tape& t = *a.tape();
    const std::size_t ia = a.id();
    Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] < 0 || index[i] >= a.rows()) throw DimensionError("gather_rows: index out of range");
        out.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
    }
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ia), [&t, ia, io, index] {
        Matrix& ga = t.grad(ia);
        const Matrix& g = t.grad(io);
        for (std::size_t i = 0; i < index.size(); ++i) ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
    });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    Tape& t = same_tape(x, gamma);
    same_tape(x, beta);
    const Eigen::Index d = x.cols();
    if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d) {
        throw DimensionError("layer_norm: gamma and beta must be 1 x d");
    }
    const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
    const Matrix& xv = x.value();
    const Eigen::VectorXd mu = xv.rowwise().mean();
    Matrix xhat = xv.colwise() - mu;
    Eigen::VectorXd inv_std(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        inv_std(r) = 1.0 / std::sqrt(xhat.row(r).squaredNorm() / static_cast<double>(d) + eps);
        xhat.row(r) *= inv_std(r);
    }
    Matrix out = xhat.array().rowwise() * gamma.value().row(0).array();
    out.rowwise() += beta.value().row(0);
    auto saved = std::make_shared<std::pair<Matrix, Eigen::VectorXd>>(std::move(xhat), std::move(inv_std));
    const std::size_t io = t.size();
    const bool rg = t.requires_grad(ix) || t.requires_grad(ig) || t.requires_grad(ib);
    return t.push(std::move(out), rg, [&t, ix, ig, ib, io, saved] {
        const Matrix& g = t.grad(io);
        const Matrix& xh = saved->first;
        if (t.requires_grad(ig)) t.grad(ig) += g.cwiseProduct(xh).colwise().sum();
        if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
        if (t.requires_grad(ix)) {
            const Matrix dxhat = g.array().rowwise() * t.value(ig).row(0).array();
            const Eigen::VectorXd m1 = dxhat.rowwise().mean();
            const Eigen::VectorXd m2 = dxhat.cwiseProduct(xh).rowwise().mean();
            Matrix& gx = t.grad(ix);
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                gx.row(r).array() +=
                    saved->second(r) * (dxhat.row(r).array() - m1(r) - xh.row(r).array() * m2(r));
            }
        }
    });
}

Var dropout(Var x, double p, Rng* rng) {
    if (p <= 0.0 || rng == nullptr) return x;
    if (p >= 1.0) throw ConfigError("dropout: probability must be below 1");
    Tape& t = *x.tape();
    const std::size_t ix = x.id();
    Matrix mask(x.rows(), x.cols());
    const double keep = 1.0 / (1.0 - p);
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < mask.rows(); ++r) mask(r, c) = rng->uniform() >= p ? keep : 0.0;
    }
    Matrix out = x.value().cwiseProduct(mask);
    auto saved = std::make_shared<Matrix>(std::move(mask));
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ix), [&t, ix, io, saved] {
        t.grad(ix) += t.grad(io).cwiseProduct(*saved);
    });
}

Var add_positional(Var x, Var pos) {
    Tape& t = same_tape(x, pos);
    const Eigen::Index T = pos.rows();
    if (pos.cols() != x.cols() || T == 0 || x.rows() % T != 0) throw DimensionError("add_positional: shape mismatch");
    const std::size_t ix = x.id(), ip = pos.id();
    Matrix out = x.value();
    for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) += pos.value().row(r % T);
    const std::size_t io = t.size();
    return t.push(std::move(out), t.requires_grad(ix) || t.requires_grad(ip), [&t, ix, ip, io, T] {
        const Matrix& g = t.grad(io);
        if (t.requires_grad(ix)) t.grad(ix) += g;
        if (t.requires_grad(ip)) {
            Matrix& gp = t.grad(ip);
            for (Eigen::Index r = 0; r < g.rows(); ++r) gp.row(r % T) += g.row(r);
        }
    });
}

Var causal_attention(Var q, Var k, Var v, Eigen::Index seq_len, Eigen::Index heads, double p, Rng* rng) {
    Tape& t = same_tape(q, k);
    same_tape(q, v);
    const Eigen::Index n = q.rows();
    const Eigen::Index d = q.cols();
    if (k.rows() != n || v.rows() != n || k.cols() != d || v.cols() != d) {
        throw DimensionError("causal_attention: q, k, v shapes differ");
    }
    if (seq_len <= 0 || n % seq_len != 0 || heads <= 0 || d % heads != 0) {
        throw DimensionError("causal_attention: rows must be a multiple of seq_len and d of heads");
    }
    const Eigen::Index T = seq_len;
    const Eigen::Index dh = d / heads;
    const Eigen::Index batches = n / T;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    const bool use_dropout = p > 0.0 && rng != nullptr;
    const double keep = use_dropout ? 1.0 / (1.0 - p) : 1.0;

    // Per (batch, head): softmax weights and the dropout-scaled weights actually applied.
    auto weights = std::make_shared<std::vector<Matrix>>();
    auto applied = std::make_shared<std::vector<Matrix>>();
    weights->reserve(static_cast<std::size_t>(batches * heads));
    if (use_dropout) applied->reserve(static_cast<std::size_t>(batches * heads));

    const Matrix& qv = q.value();
    const Matrix& kv = k.value();
    const Matrix& vv = v.value();
    Matrix out(n, d);
    for (Eigen::Index b = 0; b < batches; ++b) {
        for (Eigen::Index h = 0; h < heads; ++h) {
            Matrix s = qv.block(b * T, h * dh, T, dh) * kv.block(b * T, h * dh, T, dh).transpose() * inv_sqrt;
            for (Eigen::Index i = 0; i < T; ++i) {
                double mx = s(i, 0);
                for (Eigen::Index j = 1; j <= i; ++j) mx = std::max(mx, s(i, j));
                double z = 0.0;
                for (Eigen::Index j = 0; j < T; ++j) {
                    s(i, j) = j <= i ? std::exp(s(i, j) - mx) : 0.0;
                    z += s(i, j);
                }
                s.row(i) /= z;
            }
            if (use_dropout) {
                Matrix a = s;
                for (Eigen::Index i = 0; i < T; ++i) {
                    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = rng->uniform() >= p ? a(i, j) * keep : 0.0;
                }
                out.block(b * T, h * dh, T, dh) = a * vv.block(b * T, h * dh, T, dh);
                applied->push_back(std::move(a));
            } else {
                out.block(b * T, h * dh, T, dh) = s * vv.block(b * T, h * dh, T, dh);
            }
            weights->push_back(std::move(s));
        }
    }

    const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
    const std::size_t io = t.size();
    const bool rg = t.requires_grad(iq) || t.requires_grad(ik) || t.requires_grad(iv);
    return t.push(std::move(out), rg, [&t, iq, ik, iv, io, T, dh, heads, batches, inv_sqrt, weights, applied,
                                       use_dropout, keep] {
        const Matrix& g = t.grad(io);
        const Matrix& qv = t.value(iq);
        const Matrix& kv = t.value(ik);
        const Matrix& vv = t.value(iv);
        const bool gq = t.requires_grad(iq), gk = t.requires_grad(ik), gv = t.requires_grad(iv);
        for (Eigen::Index b = 0; b < batches; ++b) {
            for (Eigen::Index h = 0; h < heads; ++h) {
                const auto slot = static_cast<std::size_t>(b * heads + h);
                const Matrix& w = (*weights)[slot];
                const Matrix& a = use_dropout ? (*applied)[slot] : w;
                const auto go = g.block(b * T, h * dh, T, dh);
                if (gv) t.grad(iv).block(b * T, h * dh, T, dh).noalias() += a.transpose() * go;
                if (!gq && !gk) continue;
                Matrix dw = go * vv.block(b * T, h * dh, T, dh).transpose();
                if (use_dropout) {
                    // d applied / d w is keep on surviving entries, 0 on dropped ones.
                    for (Eigen::Index i = 0; i < T; ++i) {
                        for (Eigen::Index j = 0; j < T; ++j) dw(i, j) = a(i, j) != 0.0 ? dw(i, j) * keep : 0.0;
                    }
                }
                Matrix ds(T, T);
                for (Eigen::Index i = 0; i < T; ++i) {
                    const double dot = w.row(i).dot(dw.row(i));
                    for (Eigen::Index j = 0; j < T; ++j) ds(i, j) = w(i, j) * (dw(i, j) - dot) * inv_sqrt;
                }
                if (gq) t.grad(iq).block(b * T, h * dh, T, dh).noalias() += ds * kv.block(b * T, h * dh, T, dh);
                if (gk) t.grad(ik).block(b * T, h * dh, T, dh).noalias() += ds.transpose() * qv.block(b * T, h * dh, T, dh);
            }
        }
    });
}

Var detach(Var a) { return a.tape()->constant(a.value()); }

}  // namespace vdpo::nn
