#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "edgecast/quant.hpp"

namespace edgecast {

// trainable tensor with Adam state
struct Tensor {
    std::vector<double> v;
    std::vector<double> g;
    std::vector<double> m;
    std::vector<double> vel;

    explicit Tensor(size_t n = 0) : v(n, 0.0), g(n, 0.0), m(n, 0.0), vel(n, 0.0) {}
};

struct ParamStore {
    std::vector<Tensor> params;

    int add(size_t n) {
        params.emplace_back(n);
        return int(params.size()) - 1;
    }
    Tensor& operator[](int id) { return params[size_t(id)]; }
    const Tensor& operator[](int id) const { return params[size_t(id)]; }

    void zero_grad() {
        for (auto& t : params)
            std::fill(t.g.begin(), t.g.end(), 0.0);
    }
};

enum class Op {
    Input,
    Param,
    MatVec,
    AddV,
    MulV,
    Concat,
    Dot,
    ScaleC,
    WeightedSum,
    HardSigmoid,
    HardTanh,
    Softmax,
    FakeQuant,
    Requant,
    IntHardSigmoid,
    IntHardTanh,
    IntSoftmax,
};

struct Node {
    Op op;
    std::vector<int> ins;
    std::vector<double> val;
    std::vector<double> grad;
    std::vector<double> mask;  // straight-through / linear-region gate
    int rows = 0, cols = 0;    // MatVec shape
    double scalar = 0.0;       // ScaleC factor; Requant input scale
    int param_id = -1;
    QuantParams qp{};          // output grid of quantizing ops
    QuantParams qp_in{};       // input grid of integer activations
    FixedPointMultiplier mult{};
    ActKernel kernel{};
    int64_t k_q16 = 0;
};

// define-by-run tape: forward values are computed at node creation,
// backward walks the tape in reverse and accumulates into ParamStore
class Tape {
  public:
    explicit Tape(ParamStore* store = nullptr) : store_(store) {}

    void clear() { nodes_.clear(); }
    size_t size() const { return nodes_.size(); }
    const std::vector<double>& val(int id) const { return nodes_[size_t(id)].val; }
    const std::vector<double>& grad(int id) const { return nodes_[size_t(id)].grad; }

    int input(std::vector<double> v) {
        Node n;
        n.op = Op::Input;
        n.val = std::move(v);
        return push(std::move(n));
    }

    int param(int param_id) {
        Node n;
        n.op = Op::Param;
        n.param_id = param_id;
        n.val = (*store_)[param_id].v;
        return push(std::move(n));
    }

    int matvec(int w, int x, int b, int rows, int cols) {
        const auto& wv = nodes_[size_t(w)].val;
        const auto& xv = nodes_[size_t(x)].val;
        if (wv.size() != size_t(rows) * size_t(cols) || xv.size() != size_t(cols))
            throw std::invalid_argument("matvec: shape mismatch");
        Node n;
        n.op = Op::MatVec;
        n.ins = {w, x, b};
        n.rows = rows;
        n.cols = cols;
        n.val.assign(size_t(rows), 0.0);
        for (int i = 0; i < rows; ++i) {
            double acc = b >= 0 ? nodes_[size_t(b)].val[size_t(i)] : 0.0;
            const double* row = wv.data() + size_t(i) * size_t(cols);
            for (int j = 0; j < cols; ++j) acc += row[j] * xv[size_t(j)];
            n.val[size_t(i)] = acc;
        }
        return push(std::move(n));
    }

    int addv(int a, int b) {
        const auto& av = nodes_[size_t(a)].val;
        const auto& bv = nodes_[size_t(b)].val;
        if (av.size() != bv.size()) throw std::invalid_argument("addv: size mismatch");
        Node n;
        n.op = Op::AddV;
        n.ins = {a, b};
        n.val.resize(av.size());
        for (size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] + bv[i];
        return push(std::move(n));
    }

    int mulv(int a, int b) {
        const auto& av = nodes_[size_t(a)].val;
        const auto& bv = nodes_[size_t(b)].val;
        if (av.size() != bv.size()) throw std::invalid_argument("mulv: size mismatch");
        Node n;
        n.op = Op::MulV;
        n.ins = {a, b};
        n.val.resize(av.size());
        for (size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] * bv[i];
        return push(std::move(n));
    }

    int concat(int a, int b) {
        Node n;
        n.op = Op::Concat;
        n.ins = {a, b};
        n.val = nodes_[size_t(a)].val;
        const auto& bv = nodes_[size_t(b)].val;
        n.val.insert(n.val.end(), bv.begin(), bv.end());
        return push(std::move(n));
    }

    int dot(int a, int b) {
        const auto& av = nodes_[size_t(a)].val;
        const auto& bv = nodes_[size_t(b)].val;
        if (av.size() != bv.size()) throw std::invalid_argument("dot: size mismatch");
        Node n;
        n.op = Op::Dot;
        n.ins = {a, b};
        double acc = 0.0;
        for (size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
        n.val = {acc};
        return push(std::move(n));
    }

    int scale(int x, double c) {
        Node n;
        n.op = Op::ScaleC;
        n.ins = {x};
        n.scalar = c;
        n.val = nodes_[size_t(x)].val;
        for (double& v : n.val) v *= c;
        return push(std::move(n));
    }

    // out = sum_j weights[j] * vectors[j]
    int weighted_sum(int weights, const std::vector<int>& vectors) {
        const auto& av = nodes_[size_t(weights)].val;
        if (av.size() != vectors.size())
            throw std::invalid_argument("weighted_sum: arity mismatch");
        Node n;
        n.op = Op::WeightedSum;
        n.ins = {weights};
        n.ins.insert(n.ins.end(), vectors.begin(), vectors.end());
        n.val.assign(nodes_[size_t(vectors[0])].val.size(), 0.0);
        for (size_t j = 0; j < vectors.size(); ++j) {
            const auto& vj = nodes_[size_t(vectors[j])].val;
            for (size_t i = 0; i < n.val.size(); ++i) n.val[i] += av[j] * vj[i];
        }
        return push(std::move(n));
    }

    int hard_sigmoid(int x) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = Op::HardSigmoid;
        n.ins = {x};
        n.val.resize(xv.size());
        n.mask.resize(xv.size());
        for (size_t i = 0; i < xv.size(); ++i) {
            n.val[i] = std::clamp(0.25 * xv[i] + 0.5, 0.0, 1.0);
            n.mask[i] = (xv[i] > -2.0 && xv[i] < 2.0) ? 1.0 : 0.0;
        }
        return push(std::move(n));
    }

    int hard_tanh(int x) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = Op::HardTanh;
        n.ins = {x};
        n.val.resize(xv.size());
        n.mask.resize(xv.size());
        for (size_t i = 0; i < xv.size(); ++i) {
            n.val[i] = std::clamp(xv[i], -1.0, 1.0);
            n.mask[i] = (xv[i] > -1.0 && xv[i] < 1.0) ? 1.0 : 0.0;
        }
        return push(std::move(n));
    }

    int softmax(int x) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = Op::Softmax;
        n.ins = {x};
        n.val.resize(xv.size());
        double mx = xv[0];
        for (double v : xv) mx = std::max(mx, v);
        double sum = 0.0;
        for (size_t i = 0; i < xv.size(); ++i) {
            n.val[i] = std::exp(xv[i] - mx);
            sum += n.val[i];
        }
        for (double& v : n.val) v /= sum;
        return push(std::move(n));
    }

    int fake_quant(int x, const QuantParams& qp) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = Op::FakeQuant;
        n.ins = {x};
        n.qp = qp;
        n.val.resize(xv.size());
        n.mask.resize(xv.size());
        for (size_t i = 0; i < xv.size(); ++i) {
            const int64_t code = round_half_away(xv[i] / qp.scale) + qp.zero_point;
            const int64_t clamped = std::clamp<int64_t>(code, qp.qmin(), qp.qmax());
            n.val[i] = double(clamped - qp.zero_point) * qp.scale;
            n.mask[i] = code == clamped ? 1.0 : 0.0;
        }
        return push(std::move(n));
    }

    // bit-exact shadow of the engine requantize: the input value is an integer
    // accumulator times in_scale, recovered exactly by rounding
    int requant(int x, double in_scale, const FixedPointMultiplier& m,
                const QuantParams& out_qp) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = Op::Requant;
        n.ins = {x};
        n.scalar = in_scale;
        n.mult = m;
        n.qp = out_qp;
        n.val.resize(xv.size());
        n.mask.resize(xv.size());
        for (size_t i = 0; i < xv.size(); ++i) {
            const int64_t acc = round_half_away(xv[i] / in_scale);
            const int64_t prod = acc * int64_t(m.mantissa);
            const int64_t code =
                rounding_rshift(prod, 31 + m.right_shift) + out_qp.zero_point;
            const int64_t clamped = std::clamp<int64_t>(code, out_qp.qmin(), out_qp.qmax());
            n.val[i] = double(clamped - out_qp.zero_point) * out_qp.scale;
            n.mask[i] = code == clamped ? 1.0 : 0.0;
        }
        return push(std::move(n));
    }

    int int_hard_sigmoid(int x, const ActKernel& k, const QuantParams& in_qp,
                         const QuantParams& out_qp) {
        return int_act(x, k, in_qp, out_qp, Op::IntHardSigmoid);
    }

    int int_hard_tanh(int x, const ActKernel& k, const QuantParams& in_qp,
                      const QuantParams& out_qp) {
        return int_act(x, k, in_qp, out_qp, Op::IntHardTanh);
    }

    int int_softmax(int x, int64_t k_q16, const QuantParams& in_qp,
                    const QuantParams& out_qp) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = Op::IntSoftmax;
        n.ins = {x};
        n.k_q16 = k_q16;
        n.qp_in = in_qp;
        n.qp = out_qp;
        std::vector<int32_t> codes(xv.size());
        for (size_t i = 0; i < xv.size(); ++i)
            codes[i] =
                int32_t(round_half_away(xv[i] / in_qp.scale)) + in_qp.zero_point;
        std::vector<int32_t> out =
            integer_softmax_codes(codes, k_q16, int32_t(out_qp.qmax()));
        n.val.resize(xv.size());
        for (size_t i = 0; i < xv.size(); ++i)
            n.val[i] = double(out[i]) * out_qp.scale;
        return push(std::move(n));
    }

    void backward(int output, const std::vector<double>& seed) {
        for (auto& n : nodes_) n.grad.assign(n.val.size(), 0.0);
        Node& out = nodes_[size_t(output)];
        if (seed.size() != out.val.size())
            throw std::invalid_argument("backward: seed size mismatch");
        out.grad = seed;

        for (size_t idx = nodes_.size(); idx-- > 0;) {
            Node& n = nodes_[idx];
            bool any = false;
            for (double g : n.grad)
                if (g != 0.0) {
                    any = true;
                    break;
                }
            if (!any) continue;
            switch (n.op) {
                case Op::Input:
                    break;
                case Op::Param:
                    if (store_) {
                        auto& g = (*store_)[n.param_id].g;
                        for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
                    }
                    break;
                case Op::MatVec: {
                    Node& w = nodes_[size_t(n.ins[0])];
                    Node& x = nodes_[size_t(n.ins[1])];
                    for (int i = 0; i < n.rows; ++i) {
                        const double gi = n.grad[size_t(i)];
                        if (gi == 0.0) continue;
                        double* wg = w.grad.data() + size_t(i) * size_t(n.cols);
                        const double* wv = w.val.data() + size_t(i) * size_t(n.cols);
                        for (int j = 0; j < n.cols; ++j) {
                            wg[j] += gi * x.val[size_t(j)];
                            x.grad[size_t(j)] += gi * wv[j];
                        }
                    }
                    if (n.ins[2] >= 0) {
                        Node& b = nodes_[size_t(n.ins[2])];
                        for (int i = 0; i < n.rows; ++i) b.grad[size_t(i)] += n.grad[size_t(i)];
                    }
                    break;
                }
                case Op::AddV:
                    for (int k = 0; k < 2; ++k) {
                        Node& a = nodes_[size_t(n.ins[size_t(k)])];
                        for (size_t i = 0; i < n.grad.size(); ++i) a.grad[i] += n.grad[i];
                    }
                    break;
                case Op::MulV: {
                    Node& a = nodes_[size_t(n.ins[0])];
                    Node& b = nodes_[size_t(n.ins[1])];
                    for (size_t i = 0; i < n.grad.size(); ++i) {
                        a.grad[i] += n.grad[i] * b.val[i];
                        b.grad[i] += n.grad[i] * a.val[i];
                    }
                    break;
                }
                case Op::Concat: {
                    Node& a = nodes_[size_t(n.ins[0])];
                    Node& b = nodes_[size_t(n.ins[1])];
                    for (size_t i = 0; i < a.val.size(); ++i) a.grad[i] += n.grad[i];
                    for (size_t i = 0; i < b.val.size(); ++i)
                        b.grad[i] += n.grad[a.val.size() + i];
                    break;
                }
                case Op::Dot: {
                    Node& a = nodes_[size_t(n.ins[0])];
                    Node& b = nodes_[size_t(n.ins[1])];
                    for (size_t i = 0; i < a.val.size(); ++i) {
                        a.grad[i] += n.grad[0] * b.val[i];
                        b.grad[i] += n.grad[0] * a.val[i];
                    }
                    break;
                }
                case Op::ScaleC: {
                    Node& x = nodes_[size_t(n.ins[0])];
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        x.grad[i] += n.scalar * n.grad[i];
                    break;
                }
                case Op::WeightedSum: {
                    Node& a = nodes_[size_t(n.ins[0])];
                    for (size_t j = 0; j + 1 < n.ins.size(); ++j) {
                        Node& v = nodes_[size_t(n.ins[j + 1])];
                        double da = 0.0;
                        for (size_t i = 0; i < n.grad.size(); ++i) {
                            da += n.grad[i] * v.val[i];
                            v.grad[i] += a.val[j] * n.grad[i];
                        }
                        a.grad[j] += da;
                    }
                    break;
                }
                case Op::HardSigmoid:
                case Op::IntHardSigmoid: {
                    Node& x = nodes_[size_t(n.ins[0])];
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        x.grad[i] += 0.25 * n.mask[i] * n.grad[i];
                    break;
                }
                case Op::HardTanh:
                case Op::IntHardTanh: {
                    Node& x = nodes_[size_t(n.ins[0])];
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        x.grad[i] += n.mask[i] * n.grad[i];
                    break;
                }
                case Op::Softmax: {
                    Node& x = nodes_[size_t(n.ins[0])];
                    double inner = 0.0;
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        inner += n.grad[i] * n.val[i];
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        x.grad[i] += n.val[i] * (n.grad[i] - inner);
                    break;
                }
                case Op::IntSoftmax: {
                    // straight-through with the real softmax jacobian
                    Node& x = nodes_[size_t(n.ins[0])];
                    std::vector<double> p(x.val.size());
                    double mx = x.val[0];
                    for (double v : x.val) mx = std::max(mx, v);
                    double sum = 0.0;
                    for (size_t i = 0; i < p.size(); ++i) {
                        p[i] = std::exp(x.val[i] - mx);
                        sum += p[i];
                    }
                    for (double& v : p) v /= sum;
                    double inner = 0.0;
                    for (size_t i = 0; i < n.grad.size(); ++i) inner += n.grad[i] * p[i];
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        x.grad[i] += p[i] * (n.grad[i] - inner);
                    break;
                }
                case Op::FakeQuant:
                case Op::Requant: {
                    Node& x = nodes_[size_t(n.ins[0])];
                    for (size_t i = 0; i < n.grad.size(); ++i)
                        x.grad[i] += n.mask[i] * n.grad[i];
                    break;
                }
            }
        }
    }

  private:
    int push(Node&& n) {
        nodes_.push_back(std::move(n));
        return int(nodes_.size()) - 1;
    }

    int int_act(int x, const ActKernel& k, const QuantParams& in_qp,
                const QuantParams& out_qp, Op op) {
        const auto& xv = nodes_[size_t(x)].val;
        Node n;
        n.op = op;
        n.ins = {x};
        n.kernel = k;
        n.qp_in = in_qp;
        n.qp = out_qp;
        n.val.resize(xv.size());
        n.mask.resize(xv.size());
        const double lo = op == Op::IntHardSigmoid ? -2.0 : -1.0;
        const double hi = op == Op::IntHardSigmoid ? 2.0 : 1.0;
        for (size_t i = 0; i < xv.size(); ++i) {
            const int32_t code =
                int32_t(round_half_away(xv[i] / in_qp.scale)) + in_qp.zero_point;
            const int32_t out = n.kernel.apply(code);
            n.val[i] = double(out - out_qp.zero_point) * out_qp.scale;
            n.mask[i] = (xv[i] > lo && xv[i] < hi) ? 1.0 : 0.0;
        }
        return push(std::move(n));
    }

    ParamStore* store_;
    std::vector<Node> nodes_;
};

}  // namespace edgecast
