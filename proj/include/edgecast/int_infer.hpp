#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "edgecast/model.hpp"

namespace edgecast {

// compiled integer networks: weight and bias codes plus the edge set; running
// one touches integers only, enforced by an IntegerOnlyGuard section

struct QuantLstm {
    NetConfig cfg;
    LstmEdges e;
    std::array<std::vector<int32_t>, 4> w{};
    std::array<std::vector<int32_t>, 4> b{};
    std::vector<int32_t> wh;
    int32_t bh = 0;
};

struct QuantTransformer {
    NetConfig cfg;
    TransformerEdges e;
    std::vector<int32_t> w_in, b_in;
    std::vector<int32_t> w_q, b_q, w_k, b_k, w_v, b_v;
    std::vector<int32_t> w_f1, b_f1, w_f2, b_f2;
    std::vector<int32_t> w_head;
    int32_t b_head = 0;
    std::vector<std::vector<int32_t>> pe;  // position codes on the token grid
};

struct InferenceTrace {
    std::vector<int32_t> input;
    int32_t output = 0;
};

namespace detail {

inline std::vector<int32_t> quantize_codes(const std::vector<double>& v,
                                           const QuantParams& qp) {
    std::vector<int32_t> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(quantize_value(x, qp));
    return out;
}

inline int64_t centered_max(const QuantParams& qp) {
    return std::max<int64_t>(std::llabs(int64_t(qp.qmin()) - qp.zero_point),
                             int64_t(qp.qmax()) - qp.zero_point);
}

// worst-case accumulator must keep a spare bit below int32; biases that
// saturated their 31-bit grid fail here rather than wrapping at runtime
inline void check_headroom(const std::vector<int32_t>& w, const std::vector<int32_t>& b,
                           int rows, int cols, const QuantParams& in_qp) {
    const int64_t xmax = centered_max(in_qp);
    for (int i = 0; i < rows; ++i) {
        int64_t bound = b.empty() ? 0 : std::llabs(int64_t(b[size_t(i)]));
        const int32_t* row = w.data() + size_t(i) * size_t(cols);
        for (int j = 0; j < cols; ++j) bound += std::llabs(int64_t(row[j])) * xmax;
        if (bound > (int64_t(1) << 30))
            throw std::runtime_error("accumulator exceeds 32-bit headroom");
    }
}

inline void check_pair_headroom(int64_t terms, const QuantParams& a, const QuantParams& b) {
    if (terms * centered_max(a) * centered_max(b) > (int64_t(1) << 30))
        throw std::runtime_error("accumulator exceeds 32-bit headroom");
}

inline int32_t row_acc(const std::vector<int32_t>& w, const std::vector<int32_t>& b,
                       const std::vector<int32_t>& x, int i, int cols, int32_t zp_x) {
    int64_t acc = b.empty() ? 0 : b[size_t(i)];
    const int32_t* row = w.data() + size_t(i) * size_t(cols);
    for (int j = 0; j < cols; ++j) acc += int64_t(row[j]) * (x[size_t(j)] - zp_x);
    return int32_t(acc);
}

}  // namespace detail

inline QuantLstm compile_lstm(const LstmModel& m, const LstmEdges& e) {
    QuantLstm q;
    q.cfg = m.cfg;
    q.e = e;
    const int hs = m.cfg.width;
    for (int k = 0; k < 4; ++k) {
        q.w[size_t(k)] = detail::quantize_codes(m.store[m.w_gate[size_t(k)]].v, e.w[size_t(k)]);
        q.b[size_t(k)] = detail::quantize_codes(m.store[m.b_gate[size_t(k)]].v,
                                                bias_qparams(e.s_gate[size_t(k)]));
        detail::check_headroom(q.w[size_t(k)], q.b[size_t(k)], hs, hs + 1, e.in);
    }
    q.wh = detail::quantize_codes(m.store[m.w_head].v, e.wh);
    q.bh = quantize_value(m.store[m.b_head].v[0], bias_qparams(e.s_head));
    detail::check_headroom(q.wh, {q.bh}, 1, hs, e.h);
    return q;
}

inline QuantTransformer compile_transformer(const TransformerModel& m,
                                            const TransformerEdges& e) {
    QuantTransformer q;
    q.cfg = m.cfg;
    q.e = e;
    const int d = m.cfg.width;
    const int n = m.cfg.input_len;
    q.w_in = detail::quantize_codes(m.store[m.w_in].v, e.w_in);
    q.b_in = detail::quantize_codes(m.store[m.b_in].v, bias_qparams(e.s_tok));
    detail::check_headroom(q.w_in, q.b_in, d, 1, e.in);
    q.w_q = detail::quantize_codes(m.store[m.w_q].v, e.w_q);
    q.b_q = detail::quantize_codes(m.store[m.b_q].v, bias_qparams(e.s_q));
    detail::check_headroom(q.w_q, q.b_q, d, d, e.tok);
    q.w_k = detail::quantize_codes(m.store[m.w_k].v, e.w_k);
    q.b_k = detail::quantize_codes(m.store[m.b_k].v, bias_qparams(e.s_k));
    detail::check_headroom(q.w_k, q.b_k, d, d, e.tok);
    q.w_v = detail::quantize_codes(m.store[m.w_v].v, e.w_v);
    q.b_v = detail::quantize_codes(m.store[m.b_v].v, bias_qparams(e.s_v));
    detail::check_headroom(q.w_v, q.b_v, d, d, e.tok);
    q.w_f1 = detail::quantize_codes(m.store[m.w_f1].v, e.w_f1);
    q.b_f1 = detail::quantize_codes(m.store[m.b_f1].v, bias_qparams(e.s_f1));
    detail::check_headroom(q.w_f1, q.b_f1, 4 * d, d, e.res1);
    q.w_f2 = detail::quantize_codes(m.store[m.w_f2].v, e.w_f2);
    q.b_f2 = detail::quantize_codes(m.store[m.b_f2].v, bias_qparams(e.s_f2));
    detail::check_headroom(q.w_f2, q.b_f2, d, 4 * d, e.sym);
    q.w_head = detail::quantize_codes(m.store[m.w_head].v, e.w_head);
    q.b_head = quantize_value(m.store[m.b_head].v[0], bias_qparams(e.s_head));
    detail::check_headroom(q.w_head, {q.b_head}, 1, d, e.res2);
    detail::check_pair_headroom(d, e.q, e.k);
    detail::check_pair_headroom(n, e.attn, e.v);
    q.pe.reserve(e.pe.size());
    for (const auto& row : e.pe) q.pe.push_back(detail::quantize_codes(row, e.tok));
    return q;
}

inline int32_t run_lstm_int(const QuantLstm& q, const std::vector<double>& x,
                            InferenceTrace* trace = nullptr) {
    const int hs = q.cfg.width;
    const auto& e = q.e;
    if (int(x.size()) != q.cfg.input_len)
        throw std::invalid_argument("window length does not match model input_len");
    std::vector<int32_t> xc(x.size());
    for (size_t i = 0; i < x.size(); ++i) xc[i] = quantize_value(x[i], e.in);
    if (trace) trace->input = xc;

    IntegerOnlyGuard guard;
    std::vector<int32_t> h(size_t(hs), e.h.zero_point);
    std::vector<int32_t> c(size_t(hs), e.c.zero_point);
    std::vector<int32_t> z(size_t(hs) + 1, 0);
    std::array<std::vector<int32_t>, 4> g;
    for (auto& gv : g) gv.assign(size_t(hs), 0);

    for (int step = 0; step < q.cfg.input_len; ++step) {
        z[0] = xc[size_t(step)];
        for (int i = 0; i < hs; ++i)
            z[size_t(i) + 1] = requantize(h[size_t(i)] - e.h.zero_point, e.m_h2in, e.in);
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < hs; ++i) {
                const int32_t acc = detail::row_acc(q.w[size_t(k)], q.b[size_t(k)], z, i,
                                                    hs + 1, e.in.zero_point);
                g[size_t(k)][size_t(i)] =
                    requantize(acc, e.m_gate[size_t(k)], e.gate[size_t(k)]);
            }
        for (int i = 0; i < hs; ++i) {
            const int32_t gi = e.k_gate[kGateI].apply(g[kGateI][size_t(i)]);
            const int32_t gf = e.k_gate[kGateF].apply(g[kGateF][size_t(i)]);
            const int32_t gg = e.k_gate[kGateG].apply(g[kGateG][size_t(i)]);
            const int32_t go = e.k_gate[kGateO].apply(g[kGateO][size_t(i)]);
            const int32_t p1 = gf * (c[size_t(i)] - e.c.zero_point);
            const int32_t p2 = gi * gg;
            const int32_t r1 = requantize(p1, e.m_fc, e.c);
            const int32_t r2 = requantize(p2, e.m_ig, e.c);
            const int64_t sum = int64_t(r1) + r2 - e.c.zero_point;
            c[size_t(i)] = int32_t(std::clamp<int64_t>(sum, e.c.qmin(), e.c.qmax()));
            const int32_t th = e.k_ctanh.apply(c[size_t(i)]);
            h[size_t(i)] = requantize(go * th, e.m_oth, e.h);
        }
    }
    const int32_t acc = detail::row_acc(q.wh, {q.bh}, h, 0, hs, e.h.zero_point);
    const int32_t out = requantize(acc, e.m_head, e.out);
    if (trace) trace->output = out;
    return out;
}

inline int32_t run_transformer_int(const QuantTransformer& q, const std::vector<double>& x,
                                   InferenceTrace* trace = nullptr) {
    const int d = q.cfg.width;
    const int n = q.cfg.input_len;
    const auto& e = q.e;
    if (int(x.size()) != n)
        throw std::invalid_argument("window length does not match model input_len");
    std::vector<int32_t> xc(x.size());
    for (size_t i = 0; i < x.size(); ++i) xc[i] = quantize_value(x[i], e.in);
    if (trace) trace->input = xc;

    IntegerOnlyGuard guard;
    std::vector<std::vector<int32_t>> toks, ks, vs;
    std::vector<int32_t> xi(1, 0);
    for (int j = 0; j < n; ++j) {
        xi[0] = xc[size_t(j)];
        std::vector<int32_t> tok(size_t(d), 0);
        for (int i = 0; i < d; ++i) {
            const int32_t acc = detail::row_acc(q.w_in, q.b_in, xi, i, 1, e.in.zero_point);
            const int32_t proj = requantize(acc, e.m_tok, e.tok);
            const int64_t sum =
                int64_t(proj) + q.pe[size_t(j)][size_t(i)] - e.tok.zero_point;
            tok[size_t(i)] = int32_t(std::clamp<int64_t>(sum, e.tok.qmin(), e.tok.qmax()));
        }
        std::vector<int32_t> kj(size_t(d), 0), vj(size_t(d), 0);
        for (int i = 0; i < d; ++i) {
            kj[size_t(i)] = requantize(
                detail::row_acc(q.w_k, q.b_k, tok, i, d, e.tok.zero_point), e.m_k, e.k);
            vj[size_t(i)] = requantize(
                detail::row_acc(q.w_v, q.b_v, tok, i, d, e.tok.zero_point), e.m_v, e.v);
        }
        toks.push_back(std::move(tok));
        ks.push_back(std::move(kj));
        vs.push_back(std::move(vj));
    }
    std::vector<int32_t> qn(size_t(d), 0);
    for (int i = 0; i < d; ++i)
        qn[size_t(i)] = requantize(
            detail::row_acc(q.w_q, q.b_q, toks.back(), i, d, e.tok.zero_point), e.m_q, e.q);

    std::vector<int32_t> score(size_t(n), 0);
    for (int j = 0; j < n; ++j) {
        int64_t acc = 0;
        for (int i = 0; i < d; ++i)
            acc += int64_t(qn[size_t(i)] - e.q.zero_point) *
                   (ks[size_t(j)][size_t(i)] - e.k.zero_point);
        score[size_t(j)] = requantize(int32_t(acc), e.m_score, e.score);
    }
    const std::vector<int32_t> attn =
        integer_softmax_codes(score, e.k_q16, int32_t(e.attn.qmax()));

    std::vector<int32_t> res1(size_t(d), 0);
    const int32_t tok_n_zp = e.tok.zero_point;
    for (int i = 0; i < d; ++i) {
        int64_t acc = 0;
        for (int j = 0; j < n; ++j)
            acc += int64_t(attn[size_t(j)]) * (vs[size_t(j)][size_t(i)] - e.v.zero_point);
        const int32_t ctx = requantize(int32_t(acc), e.m_ctx, e.res1);
        const int32_t tok_r =
            requantize(toks.back()[size_t(i)] - tok_n_zp, e.m_tok_res1, e.res1);
        const int64_t sum = int64_t(ctx) + tok_r - e.res1.zero_point;
        res1[size_t(i)] = int32_t(std::clamp<int64_t>(sum, e.res1.qmin(), e.res1.qmax()));
    }

    std::vector<int32_t> act(size_t(4 * d), 0);
    for (int i = 0; i < 4 * d; ++i) {
        const int32_t f1 = requantize(
            detail::row_acc(q.w_f1, q.b_f1, res1, i, d, e.res1.zero_point), e.m_f1, e.f1);
        act[size_t(i)] = e.k_f1tanh.apply(f1);
    }
    std::vector<int32_t> res2(size_t(d), 0);
    for (int i = 0; i < d; ++i) {
        const int32_t f2 = requantize(
            detail::row_acc(q.w_f2, q.b_f2, act, i, 4 * d, e.sym.zero_point), e.m_f2, e.res2);
        const int32_t res1_r =
            requantize(res1[size_t(i)] - e.res1.zero_point, e.m_res1_res2, e.res2);
        const int64_t sum = int64_t(f2) + res1_r - e.res2.zero_point;
        res2[size_t(i)] = int32_t(std::clamp<int64_t>(sum, e.res2.qmin(), e.res2.qmax()));
    }
    const int32_t acc = detail::row_acc(q.w_head, {q.b_head}, res2, 0, d, e.res2.zero_point);
    const int32_t out = requantize(acc, e.m_head, e.out);
    if (trace) trace->output = out;
    return out;
}

}  // namespace edgecast
