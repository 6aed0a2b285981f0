#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace edgecast {

// Set while an integer-only inference section is running; helpers that touch
// real arithmetic assert they are not called inside such a section.
inline thread_local bool g_integer_only_section = false;

struct IntegerOnlyGuard {
    IntegerOnlyGuard() { g_integer_only_section = true; }
    ~IntegerOnlyGuard() { g_integer_only_section = false; }
};

struct QuantParams {
    double scale = 1.0;      // real units per integer step
    int32_t zero_point = 0;
    int bitwidth = 8;        // b in {4, 6, 8}
    bool is_signed = true;

    int32_t qmin() const { return is_signed ? -(1 << (bitwidth - 1)) : 0; }
    int32_t qmax() const {
        return is_signed ? (1 << (bitwidth - 1)) - 1 : (1 << bitwidth) - 1;
    }
};

struct QuantizedTensor {
    std::vector<int32_t> data;
    std::vector<int> shape;
    QuantParams qparams;
};

inline int64_t round_half_away(double x) {
    assert(!g_integer_only_section);
    return std::llround(x);
}

inline QuantParams compute_qparams(double min_val, double max_val, int bitwidth,
                                   bool symmetric, bool is_signed = true) {
    if (!std::isfinite(min_val) || !std::isfinite(max_val) || min_val > max_val)
        throw std::invalid_argument("compute_qparams: invalid range");
    // real zero must be representable
    min_val = std::min(min_val, 0.0);
    max_val = std::max(max_val, 0.0);

    QuantParams qp;
    qp.bitwidth = bitwidth;
    if (symmetric) {
        qp.is_signed = true;
        qp.zero_point = 0;
        double amax = std::max(std::fabs(min_val), std::fabs(max_val));
        qp.scale = amax > 0.0 ? amax / qp.qmax() : 1.0;
        return qp;
    }
    qp.is_signed = is_signed;
    if (min_val == 0.0 && max_val == 0.0) {
        qp.scale = 1.0;
        qp.zero_point = 0;
        return qp;
    }
    qp.scale = (max_val - min_val) / (qp.qmax() - qp.qmin());
    int64_t zp = round_half_away(-min_val / qp.scale) + qp.qmin();
    qp.zero_point = static_cast<int32_t>(
        std::min<int64_t>(qp.qmax(), std::max<int64_t>(qp.qmin(), zp)));
    return qp;
}

inline int32_t quantize_value(double x, const QuantParams& qp) {
    int64_t q = round_half_away(x / qp.scale) + qp.zero_point;
    if (q < qp.qmin()) q = qp.qmin();
    if (q > qp.qmax()) q = qp.qmax();
    return static_cast<int32_t>(q);
}

inline double dequantize_value(int32_t q, const QuantParams& qp) {
    return qp.scale * (q - qp.zero_point);
}

inline QuantizedTensor quantize(const std::vector<double>& x, const QuantParams& qp,
                                std::vector<int> shape = {}) {
    QuantizedTensor t;
    t.qparams = qp;
    if (shape.empty()) shape = {static_cast<int>(x.size())};
    t.shape = std::move(shape);
    t.data.reserve(x.size());
    for (double v : x) t.data.push_back(quantize_value(v, qp));
    return t;
}

inline std::vector<double> dequantize(const QuantizedTensor& t) {
    std::vector<double> out;
    out.reserve(t.data.size());
    for (int32_t q : t.data) out.push_back(dequantize_value(q, t.qparams));
    return out;
}

// Positive real multiplier M = mantissa * 2^-(31+right_shift), M in (0, 1].
struct FixedPointMultiplier {
    int32_t mantissa = 1 << 30;
    int right_shift = 0;

    static FixedPointMultiplier from_double(double m) {
        assert(!g_integer_only_section);
        if (!(m > 0.0) || m > 1.0)
            throw std::invalid_argument("FixedPointMultiplier: need 0 < M <= 1");
        FixedPointMultiplier fp;
        int exp = 0;
        double frac = std::frexp(m, &exp);  // m = frac * 2^exp, frac in [0.5, 1)
        int64_t mant = std::llround(frac * (double)(int64_t{1} << 31));
        if (mant == (int64_t{1} << 31)) {  // frac rounded up to 1.0
            mant >>= 1;
            exp += 1;
        }
        int rs = -exp;
        if (rs < 0) {
            // M == 1 exactly: saturate the mantissa, relative error 2^-31
            fp.mantissa = std::numeric_limits<int32_t>::max();
            fp.right_shift = 0;
            return fp;
        }
        fp.mantissa = static_cast<int32_t>(mant);
        fp.right_shift = rs;
        return fp;
    }

    double to_double() const {
        return static_cast<double>(mantissa) * std::ldexp(1.0, -31 - right_shift);
    }
};

// arithmetic right shift with round-half-away-from-zero
inline int64_t rounding_rshift(int64_t x, int s) {
    if (s <= 0) return x;
    int64_t half = int64_t{1} << (s - 1);
    if (x >= 0) return (x + half) >> s;
    return -((-x + half) >> s);
}

inline int32_t requantize(int32_t acc, const FixedPointMultiplier& m, int32_t out_zp,
                          int32_t out_qmin, int32_t out_qmax) {
    int64_t prod = static_cast<int64_t>(acc) * m.mantissa;
    int64_t r = rounding_rshift(prod, 31 + m.right_shift) + out_zp;
    if (r < out_qmin) r = out_qmin;
    if (r > out_qmax) r = out_qmax;
    return static_cast<int32_t>(r);
}

inline int32_t requantize(int32_t acc, const FixedPointMultiplier& m,
                          const QuantParams& out_qp) {
    return requantize(acc, m, out_qp.zero_point, out_qp.qmin(), out_qp.qmax());
}

// Precompiled integer activation kernel: code = clamp(round(a*x + c) + zp_out)
// with a, c in Q24 fixed point and x the centered input code. apply() touches
// integers only, so it is safe inside an IntegerOnlyGuard section.
struct ActKernel {
    int64_t a_fx = 0;
    int64_t c_fx = 0;
    int32_t zp_in = 0;
    int32_t zp_out = 0;
    int32_t lo = 0;
    int32_t hi = 0;

    static constexpr int kFrac = 24;

    static ActKernel hard_sigmoid(const QuantParams& in_qp, const QuantParams& out_qp) {
        ActKernel k;
        k.a_fx = round_half_away(in_qp.scale / (4.0 * out_qp.scale) *
                                 (double)(int64_t{1} << kFrac));
        k.c_fx = round_half_away(0.5 / out_qp.scale * (double)(int64_t{1} << kFrac));
        k.zp_in = in_qp.zero_point;
        k.zp_out = out_qp.zero_point;
        k.lo = std::max(out_qp.qmin(), out_qp.zero_point);  // hs >= 0
        int64_t hi64 = round_half_away(1.0 / out_qp.scale) + out_qp.zero_point;
        k.hi = static_cast<int32_t>(std::min<int64_t>(hi64, out_qp.qmax()));
        return k;
    }

    static ActKernel hard_tanh(const QuantParams& in_qp, const QuantParams& out_qp) {
        ActKernel k;
        k.a_fx = round_half_away(in_qp.scale / out_qp.scale *
                                 (double)(int64_t{1} << kFrac));
        k.c_fx = 0;
        k.zp_in = in_qp.zero_point;
        k.zp_out = out_qp.zero_point;
        int64_t lo64 = round_half_away(-1.0 / out_qp.scale) + out_qp.zero_point;
        int64_t hi64 = round_half_away(1.0 / out_qp.scale) + out_qp.zero_point;
        k.lo = static_cast<int32_t>(std::max<int64_t>(lo64, out_qp.qmin()));
        k.hi = static_cast<int32_t>(std::min<int64_t>(hi64, out_qp.qmax()));
        return k;
    }

    int32_t apply(int32_t q) const {
        int64_t t = a_fx * (q - zp_in) + c_fx;
        int64_t code = rounding_rshift(t, kFrac) + zp_out;
        if (code < lo) code = lo;
        if (code > hi) code = hi;
        return static_cast<int32_t>(code);
    }
};

// Integer kernel for hs(x) = clamp(0.25x + 0.5, 0, 1); out_qp covers [0, 1].
inline int32_t int_hard_sigmoid(int32_t q, const QuantParams& in_qp,
                                const QuantParams& out_qp) {
    return ActKernel::hard_sigmoid(in_qp, out_qp).apply(q);
}

// Integer kernel for ht(x) = clamp(x, -1, 1); out_qp covers [-1, 1].
inline int32_t int_hard_tanh(int32_t q, const QuantParams& in_qp,
                             const QuantParams& out_qp) {
    return ActKernel::hard_tanh(in_qp, out_qp).apply(q);
}

// exp2 fractional correction 2^-g ~= 1 - 0.672150 g + 0.172150 g^2 on [0, 1],
// endpoint exact, Q16 coefficients.
constexpr int64_t kExp2AQ16 = 44050;
constexpr int64_t kExp2BQ16 = 11282;

// Integer softmax over score codes: subtract max, base-2 exponential as a shift
// by the integer part plus a quadratic fractional correction, then normalize
// with a fixed-point reciprocal of the sum. k_q16 = round(scale*log2(e)*2^16)
// is precomputed so this stays integer-only. Output codes are unsigned [0, 1].
inline std::vector<int32_t> integer_softmax_codes(const std::vector<int32_t>& scores,
                                                  int64_t k_q16, int32_t out_qmax) {
    std::vector<int32_t> out(scores.size(), 0);
    if (scores.empty()) return out;
    if (k_q16 < 1) k_q16 = 1;
    int64_t m = scores[0];
    for (int32_t s : scores) m = std::max<int64_t>(m, s);

    std::vector<int64_t> e(scores.size(), 0);
    int64_t sum = 0;
    for (size_t j = 0; j < scores.size(); ++j) {
        int64_t diff = m - scores[j];  // >= 0
        if (diff > ((int64_t{31} << 16) / k_q16) + 1) continue;  // underflows to 0
        int64_t u = diff * k_q16;  // Q16
        int64_t ip = u >> 16;
        int64_t f = u & 0xFFFF;
        if (ip >= 31) continue;
        int64_t p = (int64_t{1} << 16) - ((kExp2AQ16 * f) >> 16) +
                    ((kExp2BQ16 * f * f) >> 32);
        e[j] = p >> ip;
        sum += e[j];
    }
    if (sum <= 0) return out;
    int64_t recip = (int64_t{1} << 47) / sum;
    for (size_t j = 0; j < scores.size(); ++j) {
        // e <= 2^16, out_qmax <= 255, recip <= 2^31: product < 2^56
        int64_t code = rounding_rshift(e[j] * out_qmax * recip, 47);
        if (code < 0) code = 0;
        if (code > out_qmax) code = out_qmax;
        out[j] = static_cast<int32_t>(code);
    }
    return out;
}

inline int64_t softmax_k_q16(const QuantParams& score_qp) {
    return round_half_away(score_qp.scale * 1.4426950408889634 * 65536.0);
}

inline std::vector<int32_t> integer_softmax(const std::vector<int32_t>& scores,
                                            const QuantParams& in_qp,
                                            const QuantParams& out_qp) {
    return integer_softmax_codes(scores, softmax_k_q16(in_qp), out_qp.qmax());
}

// fixed activation grids shared by training and inference
inline QuantParams unit_interval_qparams(int bitwidth) {  // [0, 1]
    QuantParams qp;
    qp.bitwidth = bitwidth;
    qp.is_signed = false;
    qp.zero_point = 0;
    qp.scale = 1.0 / qp.qmax();
    return qp;
}

inline QuantParams symmetric_unit_qparams(int bitwidth) {  // [-1, 1]
    QuantParams qp;
    qp.bitwidth = bitwidth;
    qp.is_signed = true;
    qp.zero_point = 0;
    qp.scale = 1.0 / qp.qmax();
    return qp;
}

}  // namespace edgecast
