#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "edgecast/quant.hpp"
#include "edgecast/rng.hpp"

using namespace edgecast;

namespace {

// real-arithmetic oracle for requantize: round(acc*M)+zp then clamp
int32_t requant_oracle(int32_t acc, double m, int32_t zp, int32_t lo, int32_t hi) {
    double v = std::round(acc * m) + zp;
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    return static_cast<int32_t>(v);
}

double hard_sigmoid_real(double x) { return std::min(1.0, std::max(0.0, 0.25 * x + 0.5)); }
double hard_tanh_real(double x) { return std::min(1.0, std::max(-1.0, x)); }

std::vector<double> softmax_real(const std::vector<double>& x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    std::vector<double> y(x.size());
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += (y[i] = std::exp(x[i] - m));
    for (double& v : y) v /= s;
    return y;
}

}  // namespace

TEST_CASE("compute_qparams symmetric full range", "[quant]") {
    QuantParams qp = compute_qparams(-1.0, 1.0, 8, true);
    REQUIRE(qp.scale == Catch::Approx(1.0 / 127.0));
    REQUIRE(qp.zero_point == 0);
    REQUIRE(qp.qmin() == -128);
    REQUIRE(qp.qmax() == 127);
}

TEST_CASE("compute_qparams asymmetric unsigned 0..6", "[quant]") {
    QuantParams qp = compute_qparams(0.0, 6.0, 8, false, false);
    REQUIRE(qp.scale == Catch::Approx(6.0 / 255.0));
    REQUIRE(qp.zero_point == 0);
    REQUIRE(qp.qmin() == 0);
    REQUIRE(qp.qmax() == 255);
}

TEST_CASE("compute_qparams keeps real zero exact", "[quant]") {
    QuantParams qp = compute_qparams(-0.3, 0.9, 6, false);
    REQUIRE(dequantize_value(qp.zero_point, qp) == 0.0);
    REQUIRE(quantize_value(0.0, qp) == qp.zero_point);

    Rng r(123);
    for (int i = 0; i < 500; ++i) {
        double a = r.uniform(-10.0, 10.0);
        double b = a + r.uniform(0.0, 20.0);
        int bits = (i % 3 == 0) ? 4 : (i % 3 == 1) ? 6 : 8;
        QuantParams q = compute_qparams(a, b, bits, i % 2 == 0);
        REQUIRE(q.scale > 0.0);
        REQUIRE(q.zero_point >= q.qmin());
        REQUIRE(q.zero_point <= q.qmax());
        REQUIRE(dequantize_value(q.zero_point, q) == 0.0);
    }
}

TEST_CASE("compute_qparams rejects non-finite and degenerate handling", "[quant]") {
    REQUIRE_THROWS_AS(compute_qparams(std::nan(""), 1.0, 8, false), std::invalid_argument);
    REQUIRE_THROWS_AS(compute_qparams(0.0, std::numeric_limits<double>::infinity(), 8, true),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(compute_qparams(2.0, 1.0, 8, false), std::invalid_argument);
    QuantParams qp = compute_qparams(0.0, 0.0, 8, false);
    REQUIRE(qp.scale == 1.0);
    // one-sided range is widened to include zero
    QuantParams qp2 = compute_qparams(2.0, 5.0, 8, false);
    REQUIRE(quantize_value(0.0, qp2) == qp2.zero_point);
    REQUIRE(dequantize_value(qp2.zero_point, qp2) == 0.0);
}

TEST_CASE("quantize basics", "[quant]") {
    QuantParams qp = compute_qparams(-1.0, 1.0, 8, true);
    REQUIRE(quantize_value(0.0, qp) == 0);
    REQUIRE(quantize_value(1.0, qp) == 127);
    REQUIRE(quantize_value(50.0, qp) == 127);     // saturates
    REQUIRE(quantize_value(-50.0, qp) == -128);   // saturates
}

TEST_CASE("round-trip error bounded by scale/2", "[quant]") {
    Rng r(9);
    for (int rep = 0; rep < 50; ++rep) {
        double lo = r.uniform(-4.0, 0.0), hi = r.uniform(0.0, 4.0);
        int bits = (rep % 3 == 0) ? 4 : (rep % 3 == 1) ? 6 : 8;
        QuantParams qp = compute_qparams(lo, hi, bits, false);
        for (int i = 0; i < 200; ++i) {
            double x = r.uniform(lo, hi);
            double back = dequantize_value(quantize_value(x, qp), qp);
            REQUIRE(std::fabs(x - back) <= qp.scale / 2 + 1e-12);
        }
    }
}

TEST_CASE("dequantize round trips every 4-bit code", "[quant]") {
    QuantParams qp = compute_qparams(-0.7, 1.3, 4, false);
    for (int32_t q = qp.qmin(); q <= qp.qmax(); ++q) {
        double x = dequantize_value(q, qp);
        REQUIRE(quantize_value(x, qp) == q);
    }
    REQUIRE(dequantize_value(qp.zero_point, qp) == 0.0);
    double back = dequantize_value(quantize_value(0.5, qp), qp);
    REQUIRE(std::fabs(back - 0.5) <= qp.scale / 2);
}

TEST_CASE("quantize is monotone non-decreasing", "[quant]") {
    QuantParams qp = compute_qparams(-2.0, 3.0, 6, false);
    int32_t prev = qp.qmin();
    for (double x = -3.0; x <= 4.0; x += 0.01) {
        int32_t q = quantize_value(x, qp);
        REQUIRE(q >= prev);
        prev = q;
    }
}

TEST_CASE("fixed-point multiplier reconstructs ratios", "[quant]") {
    Rng r(77);
    for (int i = 0; i < 2000; ++i) {
        double m = std::exp(r.uniform(std::log(1e-6), 0.0));
        FixedPointMultiplier fp = FixedPointMultiplier::from_double(m);
        REQUIRE(fp.mantissa >= (1 << 30));
        REQUIRE(fp.right_shift >= 0);
        REQUIRE(std::fabs(fp.to_double() - m) / m < std::ldexp(1.0, -30));
    }
    FixedPointMultiplier one = FixedPointMultiplier::from_double(1.0);
    REQUIRE(std::fabs(one.to_double() - 1.0) < std::ldexp(1.0, -30));
    REQUIRE_THROWS_AS(FixedPointMultiplier::from_double(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(FixedPointMultiplier::from_double(1.5), std::invalid_argument);
}

TEST_CASE("requantize halves round away from zero", "[quant]") {
    FixedPointMultiplier half = FixedPointMultiplier::from_double(0.5);
    REQUIRE(requantize(4, half, 0, -128, 127) == 2);
    REQUIRE(requantize(3, half, 0, -128, 127) == 2);    // 1.5 -> 2
    REQUIRE(requantize(-3, half, 0, -128, 127) == -2);  // -1.5 -> -2
    REQUIRE(requantize(5, half, 0, -128, 127) == 3);    // 2.5 -> 3
}

TEST_CASE("requantize matches the real oracle across int16", "[quant]") {
    Rng r(31);
    const int32_t kWide = 1 << 30;
    for (int rep = 0; rep < 4; ++rep) {
        double m = std::exp(r.uniform(std::log(1e-4), 0.0));
        FixedPointMultiplier fp = FixedPointMultiplier::from_double(m);
        double mr = fp.to_double();
        int32_t zp = static_cast<int32_t>(r.randint(-20, 20));
        for (int32_t acc = -(1 << 15); acc < (1 << 15); ++acc) {
            int32_t got = requantize(acc, fp, zp, -kWide, kWide);
            REQUIRE(got == requant_oracle(acc, mr, zp, -kWide, kWide));
        }
        // and with an 8-bit clamp
        for (int32_t acc = -(1 << 15); acc < (1 << 15); acc += 7) {
            int32_t got = requantize(acc, fp, zp, -128, 127);
            REQUIRE(got == requant_oracle(acc, mr, zp, -128, 127));
        }
    }
}

TEST_CASE("integer hard sigmoid conformance", "[quant]") {
    QuantParams in_qp = compute_qparams(-6.0, 6.0, 8, false);
    QuantParams out_qp = unit_interval_qparams(8);

    int32_t at_zero = int_hard_sigmoid(in_qp.zero_point, in_qp, out_qp);
    REQUIRE(std::abs(at_zero - quantize_value(0.5, out_qp)) <= 1);

    REQUIRE(int_hard_sigmoid(quantize_value(3.0, in_qp), in_qp, out_qp) == out_qp.qmax());
    REQUIRE(int_hard_sigmoid(quantize_value(-3.0, in_qp), in_qp, out_qp) == 0);

    for (int bits : {4, 6, 8}) {
        QuantParams in2 = compute_qparams(-5.5, 4.0, bits, false);
        QuantParams out2 = unit_interval_qparams(bits);
        int32_t prev = -1;
        for (int32_t q = in2.qmin(); q <= in2.qmax(); ++q) {
            int32_t got = int_hard_sigmoid(q, in2, out2);
            int32_t want = quantize_value(hard_sigmoid_real(dequantize_value(q, in2)), out2);
            REQUIRE(std::abs(got - want) <= 1);
            REQUIRE(got >= prev);  // monotone in the integer domain
            prev = got;
        }
    }
}

TEST_CASE("integer hard tanh conformance", "[quant]") {
    QuantParams in_qp = compute_qparams(-4.0, 4.0, 8, false);
    QuantParams out_qp = symmetric_unit_qparams(8);

    REQUIRE(int_hard_tanh(in_qp.zero_point, in_qp, out_qp) == 0);
    REQUIRE(int_hard_tanh(quantize_value(3.0, in_qp), in_qp, out_qp) == out_qp.qmax());
    REQUIRE(int_hard_tanh(quantize_value(-3.0, in_qp), in_qp, out_qp) == -out_qp.qmax());

    for (int bits : {4, 6, 8}) {
        QuantParams in2 = compute_qparams(-2.5, 3.0, bits, false);
        QuantParams out2 = symmetric_unit_qparams(bits);
        int32_t prev = out2.qmin() - 1;
        for (int32_t q = in2.qmin(); q <= in2.qmax(); ++q) {
            int32_t got = int_hard_tanh(q, in2, out2);
            int32_t want = quantize_value(hard_tanh_real(dequantize_value(q, in2)), out2);
            REQUIRE(std::abs(got - want) <= 1);
            REQUIRE(got >= prev);
            prev = got;
        }
    }
}

TEST_CASE("integer softmax: equal scores split evenly", "[quant]") {
    QuantParams score_qp = compute_qparams(-8.0, 8.0, 8, false);
    QuantParams out_qp = unit_interval_qparams(8);
    for (int len : {2, 3, 7, 24}) {
        std::vector<int32_t> scores(len, 17);
        auto codes = integer_softmax(scores, score_qp, out_qp);
        int32_t want = quantize_value(1.0 / len, out_qp);
        for (int32_t c : codes) REQUIRE(std::abs(c - want) <= 1);
    }
}

TEST_CASE("integer softmax: dominating score saturates", "[quant]") {
    QuantParams score_qp;
    score_qp.scale = 0.05;
    score_qp.zero_point = 0;
    score_qp.bitwidth = 8;
    QuantParams out_qp = unit_interval_qparams(8);
    // winner leads by 1000 codes = 50 real units >> 16 scale units
    std::vector<int32_t> scores = {0, 0, 0, 1000};
    auto codes = integer_softmax(scores, score_qp, out_qp);
    REQUIRE(codes[3] >= quantize_value(0.99, out_qp));
    for (int j = 0; j < 3; ++j) REQUIRE(codes[j] <= quantize_value(0.01, out_qp));
}

TEST_CASE("integer softmax tracks the real softmax within 2^-6", "[quant]") {
    Rng r(55);
    QuantParams out_qp = unit_interval_qparams(8);
    double worst = 0.0;
    for (int rep = 0; rep < 2000; ++rep) {
        int len = static_cast<int>(r.randint(2, 24));
        QuantParams score_qp;
        score_qp.scale = r.uniform(0.001, 0.2);
        score_qp.zero_point = static_cast<int32_t>(r.randint(-5, 5));
        std::vector<int32_t> scores(len);
        std::vector<double> reals(len);
        for (int j = 0; j < len; ++j) {
            scores[j] = static_cast<int32_t>(r.randint(-2000, 2000));
            reals[j] = score_qp.scale * (scores[j] - score_qp.zero_point);
        }
        auto codes = integer_softmax(scores, score_qp, out_qp);
        auto want = softmax_real(reals);
        for (int j = 0; j < len; ++j)
            worst = std::max(worst, std::fabs(codes[j] / 255.0 - want[j]));
    }
    REQUIRE(worst <= std::ldexp(1.0, -6));
}

TEST_CASE("quantized tensor saturates within declared bounds", "[quant]") {
    QuantParams qp = compute_qparams(-1.0, 1.0, 4, true);
    std::vector<double> xs = {-9.0, -1.0, -0.1, 0.0, 0.4, 1.0, 7.0};
    QuantizedTensor t = quantize(xs, qp);
    for (int32_t q : t.data) {
        REQUIRE(q >= qp.qmin());
        REQUIRE(q <= qp.qmax());
    }
    auto back = dequantize(t);
    REQUIRE(back.size() == xs.size());
    REQUIRE(back[3] == 0.0);
}
