#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "edgecast/int_infer.hpp"
#include "edgecast/rng.hpp"

using namespace edgecast;

namespace {

std::vector<double> random_window(Rng& rng, int n, double spread = 1.0) {
    std::vector<double> x(size_t(n), 0.0);
    for (auto& v : x) v = spread * rng.normal(0.0, 1.0);
    return x;
}

LstmObservers calibrate_lstm(LstmModel& m, uint64_t seed, int samples = 24) {
    Rng rng(seed);
    LstmObservers obs;
    for (int s = 0; s < samples; ++s) {
        Tape t(&m.store);
        build_lstm_fp32(t, m, random_window(rng, m.cfg.input_len), &obs);
    }
    obs.commit();
    return obs;
}

TransformerObservers calibrate_transformer(TransformerModel& m, uint64_t seed,
                                           int samples = 24) {
    Rng rng(seed);
    TransformerObservers obs;
    for (int s = 0; s < samples; ++s) {
        Tape t(&m.store);
        build_transformer_fp32(t, m, random_window(rng, m.cfg.input_len), &obs);
    }
    obs.commit();
    return obs;
}

int32_t shadow_output_code(double val, const QuantParams& qp) {
    return int32_t(std::llround(val / qp.scale)) + qp.zero_point;
}

}  // namespace

TEST_CASE("integer lstm engine matches the training shadow bit for bit") {
    Rng rng(601);
    for (uint64_t seed : {11u, 12u, 13u}) {
        auto m = make_lstm(6, 8, seed);
        auto obs = calibrate_lstm(m, 700 + seed);
        for (int b : {4, 6, 8}) {
            auto e = make_lstm_edges(m, obs, b);
            auto q = compile_lstm(m, e);
            for (int trial = 0; trial < 24; ++trial) {
                const double spread = trial % 4 == 3 ? 3.0 : 1.0;
                const auto x = random_window(rng, 6, spread);
                const int32_t engine = run_lstm_int(q, x);
                Tape t(&m.store);
                const double val = t.val(build_lstm_qat(t, m, e, x))[0];
                INFO("seed " << seed << " bits " << b << " trial " << trial);
                REQUIRE(engine == shadow_output_code(val, e.out));
                REQUIRE(engine >= e.out.qmin());
                REQUIRE(engine <= e.out.qmax());
            }
        }
    }
}

TEST_CASE("integer transformer engine matches the training shadow bit for bit") {
    Rng rng(602);
    for (uint64_t seed : {21u, 22u, 23u}) {
        auto m = make_transformer(6, 8, seed);
        auto obs = calibrate_transformer(m, 800 + seed);
        for (int b : {4, 6, 8}) {
            auto e = make_transformer_edges(m, obs, b);
            auto q = compile_transformer(m, e);
            for (int trial = 0; trial < 24; ++trial) {
                const double spread = trial % 4 == 3 ? 3.0 : 1.0;
                const auto x = random_window(rng, 6, spread);
                const int32_t engine = run_transformer_int(q, x);
                Tape t(&m.store);
                const double val = t.val(build_transformer_qat(t, m, e, x))[0];
                INFO("seed " << seed << " bits " << b << " trial " << trial);
                REQUIRE(engine == shadow_output_code(val, e.out));
                REQUIRE(engine >= e.out.qmin());
                REQUIRE(engine <= e.out.qmax());
            }
        }
    }
}

TEST_CASE("engine equivalence holds with a wider lstm and longer window") {
    Rng rng(603);
    auto m = make_lstm(12, 16, 31);
    auto obs = calibrate_lstm(m, 901);
    auto e = make_lstm_edges(m, obs, 8);
    auto q = compile_lstm(m, e);
    for (int trial = 0; trial < 8; ++trial) {
        const auto x = random_window(rng, 12);
        Tape t(&m.store);
        const double val = t.val(build_lstm_qat(t, m, e, x))[0];
        REQUIRE(run_lstm_int(q, x) == shadow_output_code(val, e.out));
    }
}

TEST_CASE("inference trace records input codes and the output code") {
    Rng rng(604);
    auto m = make_transformer(6, 8, 41);
    auto obs = calibrate_transformer(m, 902);
    auto e = make_transformer_edges(m, obs, 8);
    auto q = compile_transformer(m, e);
    const auto x = random_window(rng, 6);
    InferenceTrace trace;
    const int32_t out = run_transformer_int(q, x, &trace);
    REQUIRE(trace.output == out);
    REQUIRE(trace.input.size() == 6);
    for (int j = 0; j < 6; ++j)
        REQUIRE(trace.input[size_t(j)] == quantize_value(x[size_t(j)], e.in));
}

TEST_CASE("compilation is deterministic and rejects saturated accumulators") {
    auto m = make_lstm(6, 8, 51);
    auto obs = calibrate_lstm(m, 903);
    auto e = make_lstm_edges(m, obs, 8);
    auto q1 = compile_lstm(m, e);
    auto q2 = compile_lstm(m, e);
    REQUIRE(q1.w == q2.w);
    REQUIRE(q1.b == q2.b);
    REQUIRE(q1.wh == q2.wh);
    REQUIRE(q1.bh == q2.bh);

    m.store[m.b_gate[0]].v[0] = 1e9;  // saturates the 31-bit bias grid
    REQUIRE_THROWS_AS(compile_lstm(m, e), std::runtime_error);
}

TEST_CASE("dequantized engine forecasts track the full-precision model") {
    Rng rng(605);
    auto m = make_lstm(6, 8, 61);
    auto obs = calibrate_lstm(m, 904);
    auto e = make_lstm_edges(m, obs, 8);
    auto q = compile_lstm(m, e);
    const double range = double(e.out.qmax() - e.out.qmin()) * e.out.scale;
    double worst = 0.0, total = 0.0;
    const int trials = 12;
    for (int trial = 0; trial < trials; ++trial) {
        const auto x = random_window(rng, 6);
        const double yq = dequantize_value(run_lstm_int(q, x), e.out);
        Tape t(&m.store);
        const double yf = t.val(build_lstm_fp32(t, m, x))[0];
        worst = std::max(worst, std::fabs(yq - yf));
        total += std::fabs(yq - yf);
    }
    REQUIRE(worst < 0.20 * range);
    REQUIRE(total / trials < 0.08 * range);
}
