#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "edgecast/autograd.hpp"
#include "edgecast/config.hpp"
#include "edgecast/rng.hpp"

namespace edgecast {

// gate order used everywhere: input, forget, cell, output
enum LstmGate { kGateI = 0, kGateF = 1, kGateG = 2, kGateO = 3 };

struct LstmModel {
    NetConfig cfg;
    ParamStore store;
    std::array<int, 4> w_gate{};  // each width x (width+1), over [x_t; h]
    std::array<int, 4> b_gate{};
    int w_head = -1;  // 1 x width
    int b_head = -1;
};

struct TransformerModel {
    NetConfig cfg;
    ParamStore store;
    int w_in = -1, b_in = -1;      // d x 1, d
    int w_q = -1, b_q = -1;        // d x d, d
    int w_k = -1, b_k = -1;
    int w_v = -1, b_v = -1;
    int w_f1 = -1, b_f1 = -1;      // 4d x d, 4d
    int w_f2 = -1, b_f2 = -1;      // d x 4d, d
    int w_head = -1, b_head = -1;  // 1 x d, 1
};

namespace detail {

inline void init_tensor(Tensor& t, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(fan_in));
    for (double& v : t.v) v = rng.uniform(-bound, bound);
}

}  // namespace detail

inline LstmModel make_lstm(int input_len, int width, uint64_t seed) {
    LstmModel m;
    m.cfg = {ArchKind::Lstm, input_len, width};
    m.cfg.validate();
    const size_t h = size_t(width);
    Rng rng(derive_seed(seed, 0x1417));
    for (int k = 0; k < 4; ++k) {
        m.w_gate[size_t(k)] = m.store.add(h * (h + 1));
        m.b_gate[size_t(k)] = m.store.add(h);
        detail::init_tensor(m.store[m.w_gate[size_t(k)]], width + 1, rng);
        detail::init_tensor(m.store[m.b_gate[size_t(k)]], width + 1, rng);
    }
    m.w_head = m.store.add(h);
    m.b_head = m.store.add(1);
    detail::init_tensor(m.store[m.w_head], width, rng);
    detail::init_tensor(m.store[m.b_head], width, rng);
    return m;
}

inline TransformerModel make_transformer(int input_len, int width, uint64_t seed) {
    TransformerModel m;
    m.cfg = {ArchKind::Transformer, input_len, width};
    m.cfg.validate();
    const size_t d = size_t(width);
    Rng rng(derive_seed(seed, 0x7f0e));
    auto add = [&](int& w, int& b, size_t rows, size_t cols) {
        w = m.store.add(rows * cols);
        b = m.store.add(rows);
        detail::init_tensor(m.store[w], int(cols), rng);
        detail::init_tensor(m.store[b], int(cols), rng);
    };
    add(m.w_in, m.b_in, d, 1);
    add(m.w_q, m.b_q, d, d);
    add(m.w_k, m.b_k, d, d);
    add(m.w_v, m.b_v, d, d);
    add(m.w_f1, m.b_f1, 4 * d, d);
    add(m.w_f2, m.b_f2, d, 4 * d);
    add(m.w_head, m.b_head, 1, d);
    return m;
}

inline size_t model_param_count(const ParamStore& store) {
    size_t n = 0;
    for (const auto& t : store.params) n += t.v.size();
    return n;
}

// sinusoidal positional encoding, 0-based positions
inline std::vector<std::vector<double>> positional_encoding(int n, int d) {
    std::vector<std::vector<double>> pe(size_t(n), std::vector<double>(size_t(d), 0.0));
    for (int pos = 0; pos < n; ++pos) {
        for (int i = 0; i < d; i += 2) {
            const double angle = pos / std::pow(10000.0, double(i) / double(d));
            pe[size_t(pos)][size_t(i)] = std::sin(angle);
            if (i + 1 < d) pe[size_t(pos)][size_t(i + 1)] = std::cos(angle);
        }
    }
    return pe;
}

// ---------------------------------------------------------------------------
// activation range tracking

struct RangeObserver {
    double lo = 0.0, hi = 0.0;
    bool initialized = false;
    double batch_lo = std::numeric_limits<double>::infinity();
    double batch_hi = -std::numeric_limits<double>::infinity();

    void observe(double v) {
        batch_lo = std::min(batch_lo, v);
        batch_hi = std::max(batch_hi, v);
    }
    void observe(const std::vector<double>& vs) {
        for (double v : vs) observe(v);
    }
    bool batch_seen() const { return batch_lo <= batch_hi; }

    // fold the pending batch into the envelope with exponential smoothing;
    // the very first batch sets the envelope directly
    void commit(double momentum = 0.99) {
        if (!batch_seen()) return;
        if (!initialized) {
            lo = batch_lo;
            hi = batch_hi;
            initialized = true;
        } else {
            lo = momentum * lo + (1.0 - momentum) * batch_lo;
            hi = momentum * hi + (1.0 - momentum) * batch_hi;
        }
        reset_batch();
    }

    // widen the envelope to cover the pending batch outright
    void union_commit() {
        if (!batch_seen()) return;
        if (!initialized) {
            lo = batch_lo;
            hi = batch_hi;
            initialized = true;
        } else {
            lo = std::min(lo, batch_lo);
            hi = std::max(hi, batch_hi);
        }
        reset_batch();
    }

    void reset_batch() {
        batch_lo = std::numeric_limits<double>::infinity();
        batch_hi = -std::numeric_limits<double>::infinity();
    }

    QuantParams qparams(int bitwidth) const {
        if (!initialized)
            throw std::runtime_error("observer has no recorded range");
        return compute_qparams(lo, hi, bitwidth, false);
    }
};

struct LstmObservers {
    RangeObserver in, gate_i, gate_f, gate_g, gate_o, c, h, out;

    std::array<RangeObserver*, 8> all() {
        return {&in, &gate_i, &gate_f, &gate_g, &gate_o, &c, &h, &out};
    }
    RangeObserver& gate(int k) {
        RangeObserver* g[4] = {&gate_i, &gate_f, &gate_g, &gate_o};
        return *g[size_t(k)];
    }
    void commit(double momentum = 0.99) {
        for (auto* o : all()) o->commit(momentum);
    }
    void union_commit() {
        for (auto* o : all()) o->union_commit();
    }
    bool ready() {
        for (auto* o : all())
            if (!o->initialized) return false;
        return true;
    }
};

struct TransformerObservers {
    RangeObserver in, tok, q, k, v, score, res1, f1, res2, out;

    std::array<RangeObserver*, 10> all() {
        return {&in, &tok, &q, &k, &v, &score, &res1, &f1, &res2, &out};
    }
    void commit(double momentum = 0.99) {
        for (auto* o : all()) o->commit(momentum);
    }
    void union_commit() {
        for (auto* o : all()) o->union_commit();
    }
    bool ready() {
        for (auto* o : all())
            if (!o->initialized) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// full-precision graphs

inline int build_lstm_fp32(Tape& t, const LstmModel& m, const std::vector<double>& x,
                           LstmObservers* obs = nullptr) {
    const int hs = m.cfg.width;
    if (int(x.size()) != m.cfg.input_len)
        throw std::invalid_argument("window length does not match model input_len");
    std::array<int, 4> wn{}, bn{};
    for (int k = 0; k < 4; ++k) {
        wn[size_t(k)] = t.param(m.w_gate[size_t(k)]);
        bn[size_t(k)] = t.param(m.b_gate[size_t(k)]);
    }
    int h = t.input(std::vector<double>(size_t(hs), 0.0));
    int c = t.input(std::vector<double>(size_t(hs), 0.0));
    for (int step = 0; step < m.cfg.input_len; ++step) {
        if (obs) obs->in.observe(x[size_t(step)]);
        const int z = t.concat(t.input({x[size_t(step)]}), h);
        std::array<int, 4> acc{};
        for (int k = 0; k < 4; ++k) {
            acc[size_t(k)] = t.matvec(wn[size_t(k)], z, bn[size_t(k)], hs, hs + 1);
            if (obs) obs->gate(k).observe(t.val(acc[size_t(k)]));
        }
        const int gi = t.hard_sigmoid(acc[kGateI]);
        const int gf = t.hard_sigmoid(acc[kGateF]);
        const int gg = t.hard_tanh(acc[kGateG]);
        const int go = t.hard_sigmoid(acc[kGateO]);
        const int p1 = t.mulv(gf, c);
        const int p2 = t.mulv(gi, gg);
        c = t.addv(p1, p2);
        if (obs) {
            obs->c.observe(t.val(p1));
            obs->c.observe(t.val(p2));
            obs->c.observe(t.val(c));
        }
        const int th = t.hard_tanh(c);
        h = t.mulv(go, th);
        if (obs) {
            obs->h.observe(t.val(h));
            obs->in.observe(t.val(h));
        }
    }
    const int out = t.matvec(t.param(m.w_head), h, t.param(m.b_head), 1, hs);
    if (obs) obs->out.observe(t.val(out));
    return out;
}

inline int build_transformer_fp32(Tape& t, const TransformerModel& m,
                                  const std::vector<double>& x,
                                  TransformerObservers* obs = nullptr) {
    const int d = m.cfg.width;
    const int n = m.cfg.input_len;
    if (int(x.size()) != n)
        throw std::invalid_argument("window length does not match model input_len");
    const auto pe = positional_encoding(n, d);

    const int w_in = t.param(m.w_in), b_in = t.param(m.b_in);
    const int w_k = t.param(m.w_k), b_k = t.param(m.b_k);
    const int w_v = t.param(m.w_v), b_v = t.param(m.b_v);

    std::vector<int> toks, ks, vs;
    for (int j = 0; j < n; ++j) {
        if (obs) obs->in.observe(x[size_t(j)]);
        const int xi = t.input({x[size_t(j)]});
        const int proj = t.matvec(w_in, xi, b_in, d, 1);
        const int tok = t.addv(proj, t.input(pe[size_t(j)]));
        if (obs) {
            obs->tok.observe(t.val(proj));
            obs->tok.observe(pe[size_t(j)]);
            obs->tok.observe(t.val(tok));
        }
        toks.push_back(tok);
        const int kj = t.matvec(w_k, tok, b_k, d, d);
        const int vj = t.matvec(w_v, tok, b_v, d, d);
        if (obs) {
            obs->k.observe(t.val(kj));
            obs->v.observe(t.val(vj));
        }
        ks.push_back(kj);
        vs.push_back(vj);
    }
    // only the final token feeds the forecasting head
    const int qn = t.matvec(t.param(m.w_q), toks.back(), t.param(m.b_q), d, d);
    if (obs) obs->q.observe(t.val(qn));
    const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
    int scores = -1;
    for (int j = 0; j < n; ++j) {
        const int s = t.scale(t.dot(qn, ks[size_t(j)]), inv_sqrt_d);
        scores = j == 0 ? s : t.concat(scores, s);
    }
    if (obs) obs->score.observe(t.val(scores));
    const int attn = t.softmax(scores);
    const int ctx = t.weighted_sum(attn, vs);
    const int res1 = t.addv(toks.back(), ctx);
    if (obs) {
        obs->res1.observe(t.val(ctx));
        obs->res1.observe(t.val(toks.back()));
        obs->res1.observe(t.val(res1));
    }
    const int a1 = t.matvec(t.param(m.w_f1), res1, t.param(m.b_f1), 4 * d, d);
    if (obs) obs->f1.observe(t.val(a1));
    const int act = t.hard_tanh(a1);
    const int a2 = t.matvec(t.param(m.w_f2), act, t.param(m.b_f2), d, 4 * d);
    const int res2 = t.addv(res1, a2);
    if (obs) {
        obs->res2.observe(t.val(a2));
        obs->res2.observe(t.val(res1));
        obs->res2.observe(t.val(res2));
    }
    const int out = t.matvec(t.param(m.w_head), res2, t.param(m.b_head), 1, d);
    if (obs) obs->out.observe(t.val(out));
    return out;
}

// ---------------------------------------------------------------------------
// quantization edges: every grid, multiplier and kernel the integer engine
// needs, derived from observer envelopes and live weights

inline QuantParams bias_qparams(double acc_scale) {
    QuantParams qp;
    qp.scale = acc_scale;
    qp.zero_point = 0;
    qp.bitwidth = 31;  // accumulator grid; int32 arithmetic with headroom
    qp.is_signed = true;
    return qp;
}

inline QuantParams weight_qparams(const Tensor& w, int bitwidth) {
    double amax = 0.0;
    for (double v : w.v) amax = std::max(amax, std::fabs(v));
    return compute_qparams(-amax, amax, bitwidth, true);
}

namespace detail {

// scale the representable range of an activation grid by the given factor
inline QuantParams widen_qparams(const QuantParams& qp, double factor) {
    const double lo = double(qp.qmin() - qp.zero_point) * qp.scale * factor;
    const double hi = double(qp.qmax() - qp.zero_point) * qp.scale * factor;
    return compute_qparams(lo, hi, qp.bitwidth, false, qp.is_signed);
}

// ensure ratio = num / out.scale is a representable multiplier; widens the
// output grid whenever the ratio exceeds one and reports whether it changed
inline bool fit_multiplier(double num, QuantParams& out_qp) {
    const double ratio = num / out_qp.scale;
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw std::runtime_error("degenerate requantize ratio");
    if (ratio <= 1.0) return false;
    out_qp = widen_qparams(out_qp, ratio * (1.0 + 1e-12));
    return true;
}

}  // namespace detail

struct LstmEdges {
    int bitwidth = 8;
    QuantParams in, c, h, out;
    std::array<QuantParams, 4> gate;
    QuantParams unit, sym;
    std::array<QuantParams, 4> w;
    QuantParams wh;
    std::array<double, 4> s_gate{};  // accumulator scales per gate matvec
    double s_head = 0.0;
    double s_fc = 0.0, s_ig = 0.0, s_oth = 0.0;
    FixedPointMultiplier m_h2in, m_fc, m_ig, m_oth, m_head;
    std::array<FixedPointMultiplier, 4> m_gate;
    std::array<ActKernel, 4> k_gate;
    ActKernel k_ctanh;
};

inline LstmEdges make_lstm_edges(const LstmModel& m, LstmObservers& obs, int bitwidth) {
    if (!obs.ready()) throw std::runtime_error("observers not calibrated");
    LstmEdges e;
    e.bitwidth = bitwidth;
    e.unit = unit_interval_qparams(bitwidth);
    e.sym = symmetric_unit_qparams(bitwidth);
    e.in = obs.in.qparams(bitwidth);
    for (int k = 0; k < 4; ++k) {
        e.gate[size_t(k)] = obs.gate(k).qparams(bitwidth);
        e.w[size_t(k)] = weight_qparams(m.store[m.w_gate[size_t(k)]], bitwidth);
    }
    e.c = obs.c.qparams(bitwidth);
    e.h = obs.h.qparams(bitwidth);
    e.out = obs.out.qparams(bitwidth);
    e.wh = weight_qparams(m.store[m.w_head], bitwidth);

    // requantize ratios must land in (0,1]; widening one grid can push another
    // edge over, so iterate to a fixpoint
    for (int iter = 0;; ++iter) {
        if (iter > 100) throw std::runtime_error("edge widening did not converge");
        bool changed = false;
        changed |= detail::fit_multiplier(e.h.scale, e.in);
        for (int k = 0; k < 4; ++k)
            changed |= detail::fit_multiplier(e.in.scale * e.w[size_t(k)].scale,
                                              e.gate[size_t(k)]);
        changed |= detail::fit_multiplier(e.unit.scale * e.c.scale, e.c);
        changed |= detail::fit_multiplier(e.unit.scale * e.sym.scale, e.c);
        changed |= detail::fit_multiplier(e.unit.scale * e.sym.scale, e.h);
        changed |= detail::fit_multiplier(e.h.scale * e.wh.scale, e.out);
        if (!changed) break;
    }

    for (int k = 0; k < 4; ++k) e.s_gate[size_t(k)] = e.in.scale * e.w[size_t(k)].scale;
    e.s_fc = e.unit.scale * e.c.scale;
    e.s_ig = e.unit.scale * e.sym.scale;
    e.s_oth = e.unit.scale * e.sym.scale;
    e.s_head = e.h.scale * e.wh.scale;

    e.m_h2in = FixedPointMultiplier::from_double(e.h.scale / e.in.scale);
    for (int k = 0; k < 4; ++k)
        e.m_gate[size_t(k)] =
            FixedPointMultiplier::from_double(e.s_gate[size_t(k)] / e.gate[size_t(k)].scale);
    e.m_fc = FixedPointMultiplier::from_double(e.s_fc / e.c.scale);
    e.m_ig = FixedPointMultiplier::from_double(e.s_ig / e.c.scale);
    e.m_oth = FixedPointMultiplier::from_double(e.s_oth / e.h.scale);
    e.m_head = FixedPointMultiplier::from_double(e.s_head / e.out.scale);

    e.k_gate[kGateI] = ActKernel::hard_sigmoid(e.gate[kGateI], e.unit);
    e.k_gate[kGateF] = ActKernel::hard_sigmoid(e.gate[kGateF], e.unit);
    e.k_gate[kGateG] = ActKernel::hard_tanh(e.gate[kGateG], e.sym);
    e.k_gate[kGateO] = ActKernel::hard_sigmoid(e.gate[kGateO], e.unit);
    e.k_ctanh = ActKernel::hard_tanh(e.c, e.sym);
    return e;
}

struct TransformerEdges {
    int bitwidth = 8;
    QuantParams in, tok, q, k, v, score, res1, f1, res2, out;
    QuantParams attn, sym;
    QuantParams w_in, w_q, w_k, w_v, w_f1, w_f2, w_head;
    double s_tok = 0.0, s_q = 0.0, s_k = 0.0, s_v = 0.0, s_score = 0.0;
    double s_ctx = 0.0, s_f1 = 0.0, s_f2 = 0.0, s_head = 0.0;
    FixedPointMultiplier m_tok, m_q, m_k, m_v, m_score, m_ctx, m_tok_res1;
    FixedPointMultiplier m_f1, m_f2, m_res1_res2, m_head;
    int64_t k_q16 = 0;
    ActKernel k_f1tanh;
    std::vector<std::vector<double>> pe;
};

inline TransformerEdges make_transformer_edges(const TransformerModel& m,
                                               TransformerObservers& obs, int bitwidth) {
    if (!obs.ready()) throw std::runtime_error("observers not calibrated");
    const int d = m.cfg.width;
    TransformerEdges e;
    e.bitwidth = bitwidth;
    e.attn = unit_interval_qparams(bitwidth);
    e.sym = symmetric_unit_qparams(bitwidth);
    e.in = obs.in.qparams(bitwidth);
    e.tok = obs.tok.qparams(bitwidth);
    e.q = obs.q.qparams(bitwidth);
    e.k = obs.k.qparams(bitwidth);
    e.v = obs.v.qparams(bitwidth);
    e.score = obs.score.qparams(bitwidth);
    e.res1 = obs.res1.qparams(bitwidth);
    e.f1 = obs.f1.qparams(bitwidth);
    e.res2 = obs.res2.qparams(bitwidth);
    e.out = obs.out.qparams(bitwidth);
    e.w_in = weight_qparams(m.store[m.w_in], bitwidth);
    e.w_q = weight_qparams(m.store[m.w_q], bitwidth);
    e.w_k = weight_qparams(m.store[m.w_k], bitwidth);
    e.w_v = weight_qparams(m.store[m.w_v], bitwidth);
    e.w_f1 = weight_qparams(m.store[m.w_f1], bitwidth);
    e.w_f2 = weight_qparams(m.store[m.w_f2], bitwidth);
    e.w_head = weight_qparams(m.store[m.w_head], bitwidth);

    const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
    for (int iter = 0;; ++iter) {
        if (iter > 100) throw std::runtime_error("edge widening did not converge");
        bool changed = false;
        changed |= detail::fit_multiplier(e.in.scale * e.w_in.scale, e.tok);
        changed |= detail::fit_multiplier(e.tok.scale * e.w_q.scale, e.q);
        changed |= detail::fit_multiplier(e.tok.scale * e.w_k.scale, e.k);
        changed |= detail::fit_multiplier(e.tok.scale * e.w_v.scale, e.v);
        changed |= detail::fit_multiplier(e.q.scale * e.k.scale * inv_sqrt_d, e.score);
        changed |= detail::fit_multiplier(e.attn.scale * e.v.scale, e.res1);
        changed |= detail::fit_multiplier(e.tok.scale, e.res1);
        changed |= detail::fit_multiplier(e.res1.scale * e.w_f1.scale, e.f1);
        changed |= detail::fit_multiplier(e.sym.scale * e.w_f2.scale, e.res2);
        changed |= detail::fit_multiplier(e.res1.scale, e.res2);
        changed |= detail::fit_multiplier(e.res2.scale * e.w_head.scale, e.out);
        if (!changed) break;
    }

    e.s_tok = e.in.scale * e.w_in.scale;
    e.s_q = e.tok.scale * e.w_q.scale;
    e.s_k = e.tok.scale * e.w_k.scale;
    e.s_v = e.tok.scale * e.w_v.scale;
    e.s_score = e.q.scale * e.k.scale * inv_sqrt_d;
    e.s_ctx = e.attn.scale * e.v.scale;
    e.s_f1 = e.res1.scale * e.w_f1.scale;
    e.s_f2 = e.sym.scale * e.w_f2.scale;
    e.s_head = e.res2.scale * e.w_head.scale;

    e.m_tok = FixedPointMultiplier::from_double(e.s_tok / e.tok.scale);
    e.m_q = FixedPointMultiplier::from_double(e.s_q / e.q.scale);
    e.m_k = FixedPointMultiplier::from_double(e.s_k / e.k.scale);
    e.m_v = FixedPointMultiplier::from_double(e.s_v / e.v.scale);
    e.m_score = FixedPointMultiplier::from_double(e.s_score / e.score.scale);
    e.m_ctx = FixedPointMultiplier::from_double(e.s_ctx / e.res1.scale);
    e.m_tok_res1 = FixedPointMultiplier::from_double(e.tok.scale / e.res1.scale);
    e.m_f1 = FixedPointMultiplier::from_double(e.s_f1 / e.f1.scale);
    e.m_f2 = FixedPointMultiplier::from_double(e.s_f2 / e.res2.scale);
    e.m_res1_res2 = FixedPointMultiplier::from_double(e.res1.scale / e.res2.scale);
    e.m_head = FixedPointMultiplier::from_double(e.s_head / e.out.scale);

    e.k_q16 = softmax_k_q16(e.score);
    e.k_f1tanh = ActKernel::hard_tanh(e.f1, e.sym);
    e.pe = positional_encoding(m.cfg.input_len, d);
    return e;
}

// ---------------------------------------------------------------------------
// quantization-aware graphs: a bit-exact shadow of the integer engine

inline int build_lstm_qat(Tape& t, const LstmModel& m, const LstmEdges& e,
                          const std::vector<double>& x, LstmObservers* obs = nullptr) {
    const int hs = m.cfg.width;
    if (int(x.size()) != m.cfg.input_len)
        throw std::invalid_argument("window length does not match model input_len");
    std::array<int, 4> wq{}, bq{};
    for (int k = 0; k < 4; ++k) {
        wq[size_t(k)] = t.fake_quant(t.param(m.w_gate[size_t(k)]), e.w[size_t(k)]);
        bq[size_t(k)] = t.fake_quant(t.param(m.b_gate[size_t(k)]),
                                     bias_qparams(e.s_gate[size_t(k)]));
    }
    const int whq = t.fake_quant(t.param(m.w_head), e.wh);
    const int bhq = t.fake_quant(t.param(m.b_head), bias_qparams(e.s_head));

    int h = t.input(std::vector<double>(size_t(hs), 0.0));
    int c = t.input(std::vector<double>(size_t(hs), 0.0));
    for (int step = 0; step < m.cfg.input_len; ++step) {
        if (obs) obs->in.observe(x[size_t(step)]);
        const int xq = t.fake_quant(t.input({x[size_t(step)]}), e.in);
        const int hin = t.requant(h, e.h.scale, e.m_h2in, e.in);
        const int z = t.concat(xq, hin);
        std::array<int, 4> accq{};
        for (int k = 0; k < 4; ++k) {
            const int acc = t.matvec(wq[size_t(k)], z, bq[size_t(k)], hs, hs + 1);
            if (obs) obs->gate(k).observe(t.val(acc));
            accq[size_t(k)] =
                t.requant(acc, e.s_gate[size_t(k)], e.m_gate[size_t(k)], e.gate[size_t(k)]);
        }
        const int gi = t.int_hard_sigmoid(accq[kGateI], e.k_gate[kGateI], e.gate[kGateI], e.unit);
        const int gf = t.int_hard_sigmoid(accq[kGateF], e.k_gate[kGateF], e.gate[kGateF], e.unit);
        const int gg = t.int_hard_tanh(accq[kGateG], e.k_gate[kGateG], e.gate[kGateG], e.sym);
        const int go = t.int_hard_sigmoid(accq[kGateO], e.k_gate[kGateO], e.gate[kGateO], e.unit);
        const int p1 = t.mulv(gf, c);
        const int p2 = t.mulv(gi, gg);
        const int r1 = t.requant(p1, e.s_fc, e.m_fc, e.c);
        const int r2 = t.requant(p2, e.s_ig, e.m_ig, e.c);
        const int csum = t.addv(r1, r2);
        if (obs) {
            obs->c.observe(t.val(p1));
            obs->c.observe(t.val(p2));
            obs->c.observe(t.val(csum));
        }
        c = t.fake_quant(csum, e.c);
        const int th = t.int_hard_tanh(c, e.k_ctanh, e.c, e.sym);
        const int hp = t.mulv(go, th);
        if (obs) {
            obs->h.observe(t.val(hp));
            obs->in.observe(t.val(hp));
        }
        h = t.requant(hp, e.s_oth, e.m_oth, e.h);
    }
    const int acc_out = t.matvec(whq, h, bhq, 1, hs);
    if (obs) obs->out.observe(t.val(acc_out));
    return t.requant(acc_out, e.s_head, e.m_head, e.out);
}

inline int build_transformer_qat(Tape& t, const TransformerModel& m,
                                 const TransformerEdges& e, const std::vector<double>& x,
                                 TransformerObservers* obs = nullptr) {
    const int d = m.cfg.width;
    const int n = m.cfg.input_len;
    if (int(x.size()) != n)
        throw std::invalid_argument("window length does not match model input_len");

    const int w_in = t.fake_quant(t.param(m.w_in), e.w_in);
    const int b_in = t.fake_quant(t.param(m.b_in), bias_qparams(e.s_tok));
    const int w_q = t.fake_quant(t.param(m.w_q), e.w_q);
    const int b_q = t.fake_quant(t.param(m.b_q), bias_qparams(e.s_q));
    const int w_k = t.fake_quant(t.param(m.w_k), e.w_k);
    const int b_k = t.fake_quant(t.param(m.b_k), bias_qparams(e.s_k));
    const int w_v = t.fake_quant(t.param(m.w_v), e.w_v);
    const int b_v = t.fake_quant(t.param(m.b_v), bias_qparams(e.s_v));
    const int w_f1 = t.fake_quant(t.param(m.w_f1), e.w_f1);
    const int b_f1 = t.fake_quant(t.param(m.b_f1), bias_qparams(e.s_f1));
    const int w_f2 = t.fake_quant(t.param(m.w_f2), e.w_f2);
    const int b_f2 = t.fake_quant(t.param(m.b_f2), bias_qparams(e.s_f2));
    const int w_head = t.fake_quant(t.param(m.w_head), e.w_head);
    const int b_head = t.fake_quant(t.param(m.b_head), bias_qparams(e.s_head));

    std::vector<int> toks, ks, vs;
    for (int j = 0; j < n; ++j) {
        if (obs) obs->in.observe(x[size_t(j)]);
        const int xq = t.fake_quant(t.input({x[size_t(j)]}), e.in);
        const int acc = t.matvec(w_in, xq, b_in, d, 1);
        if (obs) obs->tok.observe(t.val(acc));
        const int proj = t.requant(acc, e.s_tok, e.m_tok, e.tok);
        const int peq = t.fake_quant(t.input(e.pe[size_t(j)]), e.tok);
        const int sum = t.addv(proj, peq);
        if (obs) {
            obs->tok.observe(e.pe[size_t(j)]);
            obs->tok.observe(t.val(sum));
        }
        const int tok = t.fake_quant(sum, e.tok);
        toks.push_back(tok);
        const int acc_k = t.matvec(w_k, tok, b_k, d, d);
        const int acc_v = t.matvec(w_v, tok, b_v, d, d);
        if (obs) {
            obs->k.observe(t.val(acc_k));
            obs->v.observe(t.val(acc_v));
        }
        ks.push_back(t.requant(acc_k, e.s_k, e.m_k, e.k));
        vs.push_back(t.requant(acc_v, e.s_v, e.m_v, e.v));
    }
    const int acc_q = t.matvec(w_q, toks.back(), b_q, d, d);
    if (obs) obs->q.observe(t.val(acc_q));
    const int qn = t.requant(acc_q, e.s_q, e.m_q, e.q);

    const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
    int scores = -1;
    for (int j = 0; j < n; ++j) {
        const int s = t.scale(t.dot(qn, ks[size_t(j)]), inv_sqrt_d);
        scores = j == 0 ? s : t.concat(scores, s);
    }
    if (obs) obs->score.observe(t.val(scores));
    const int score_q = t.requant(scores, e.s_score, e.m_score, e.score);
    const int attn = t.int_softmax(score_q, e.k_q16, e.score, e.attn);
    const int ctx = t.weighted_sum(attn, vs);
    const int ctx_q = t.requant(ctx, e.s_ctx, e.m_ctx, e.res1);
    const int tok_r = t.requant(toks.back(), e.tok.scale, e.m_tok_res1, e.res1);
    const int rsum = t.addv(ctx_q, tok_r);
    if (obs) {
        obs->res1.observe(t.val(ctx));
        obs->res1.observe(t.val(toks.back()));
        obs->res1.observe(t.val(rsum));
    }
    const int res1 = t.fake_quant(rsum, e.res1);

    const int a1 = t.matvec(w_f1, res1, b_f1, 4 * d, d);
    if (obs) obs->f1.observe(t.val(a1));
    const int f1q = t.requant(a1, e.s_f1, e.m_f1, e.f1);
    const int act = t.int_hard_tanh(f1q, e.k_f1tanh, e.f1, e.sym);
    const int a2 = t.matvec(w_f2, act, b_f2, d, 4 * d);
    const int f2q = t.requant(a2, e.s_f2, e.m_f2, e.res2);
    const int res1_r = t.requant(res1, e.res1.scale, e.m_res1_res2, e.res2);
    const int r2sum = t.addv(f2q, res1_r);
    if (obs) {
        obs->res2.observe(t.val(a2));
        obs->res2.observe(t.val(res1));
        obs->res2.observe(t.val(r2sum));
    }
    const int res2 = t.fake_quant(r2sum, e.res2);

    const int acc_out = t.matvec(w_head, res2, b_head, 1, d);
    if (obs) obs->out.observe(t.val(acc_out));
    return t.requant(acc_out, e.s_head, e.m_head, e.out);
}

}  // namespace edgecast
