#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "edgecast/manifest.hpp"
#include "edgecast/rng.hpp"

using namespace edgecast;

namespace {

std::vector<double> random_window(Rng& rng, int n, double spread = 1.0) {
    std::vector<double> x(size_t(n), 0.0);
    for (auto& v : x) v = spread * rng.normal(0.0, 1.0);
    return x;
}

QuantLstm fresh_lstm(uint64_t seed, int n = 6, int width = 8, int bits = 8) {
    auto m = make_lstm(n, width, seed);
    Rng rng(900 + seed);
    LstmObservers obs;
    for (int s = 0; s < 24; ++s) {
        Tape t(&m.store);
        build_lstm_fp32(t, m, random_window(rng, n), &obs);
    }
    obs.commit();
    return compile_lstm(m, make_lstm_edges(m, obs, bits));
}

QuantTransformer fresh_transformer(uint64_t seed, int n = 6, int width = 8,
                                   int bits = 8) {
    auto m = make_transformer(n, width, seed);
    Rng rng(950 + seed);
    TransformerObservers obs;
    for (int s = 0; s < 24; ++s) {
        Tape t(&m.store);
        build_transformer_fp32(t, m, random_window(rng, n), &obs);
    }
    obs.commit();
    return compile_transformer(m, make_transformer_edges(m, obs, bits));
}

}  // namespace

TEST_CASE("crc32 reference vectors") {
    // the canonical check value for the reflected 0xEDB88320 polynomial
    REQUIRE(detail::crc32(std::string("123456789")) == 0xCBF43926u);
    REQUIRE(detail::crc32(std::string("")) == 0x00000000u);
    REQUIRE(detail::crc32(std::string("a")) == 0xE8B7BE43u);
    const std::string x(32, '\0');
    REQUIRE(detail::crc32(x) == 0x190A55ADu);
}

TEST_CASE("manifest round-trips byte-identically") {
    for (int bits : {4, 6, 8}) {
        const QuantLstm q = fresh_lstm(41, 6, 8, bits);
        const std::string first = serialize_manifest(q);
        const LoadedManifest m = parse_manifest(first);
        REQUIRE(m.arch == ArchKind::Lstm);
        REQUIRE(m.cfg().input_len == 6);
        REQUIRE(m.cfg().width == 8);
        REQUIRE(m.bitwidth() == bits);
        REQUIRE(m.goldens.size() == size_t(detail::kGoldenCount));
        const std::string second = serialize_manifest(m.lstm);
        REQUIRE(first == second);
    }
    for (int bits : {4, 8}) {
        const QuantTransformer q = fresh_transformer(42, 6, 8, bits);
        const std::string first = serialize_manifest(q);
        const LoadedManifest m = parse_manifest(first);
        REQUIRE(m.arch == ArchKind::Transformer);
        const std::string second = serialize_manifest(m.transformer);
        REQUIRE(first == second);
    }
}

TEST_CASE("manifest serialization is deterministic") {
    const std::string a = serialize_manifest(fresh_lstm(77));
    const std::string b = serialize_manifest(fresh_lstm(77));
    REQUIRE(a == b);
    const std::string c = serialize_manifest(fresh_lstm(78));
    REQUIRE(a != c);
}

TEST_CASE("verify accepts fresh manifests of both architectures") {
    REQUIRE_NOTHROW(verify_manifest(serialize_manifest(fresh_lstm(51))));
    REQUIRE_NOTHROW(verify_manifest(serialize_manifest(fresh_lstm(52, 12, 16, 4))));
    REQUIRE_NOTHROW(verify_manifest(serialize_manifest(fresh_transformer(53))));
    REQUIRE_NOTHROW(verify_manifest(serialize_manifest(fresh_transformer(54, 12, 8, 6))));
}

TEST_CASE("verify rejects damaged manifests") {
    const std::string good = serialize_manifest(fresh_lstm(61));

    SECTION("bad magic") {
        std::string bad = good;
        bad[0] = 'X';
        REQUIRE_THROWS_WITH(parse_manifest(bad), "not a deployment manifest");
    }

    SECTION("unsupported version") {
        std::string bad = good;
        bad[4] = char(99);
        REQUIRE_THROWS_WITH(parse_manifest(bad), "unsupported manifest version");
    }

    SECTION("every single payload byte flip is caught by the checksum") {
        Rng rng(4114);
        for (int rep = 0; rep < 200; ++rep) {
            std::string bad = good;
            const size_t pos = 12 + size_t(rng.randint(0, int64_t(good.size()) - 17));
            bad[pos] = char(bad[pos] ^ char(1 << rng.randint(0, 7)));
            REQUIRE_THROWS_WITH(parse_manifest(bad), "manifest checksum mismatch");
        }
    }

    SECTION("truncation and trailing bytes") {
        REQUIRE_THROWS_WITH(parse_manifest(good.substr(0, good.size() - 5)),
                            "manifest size mismatch");
        REQUIRE_THROWS_WITH(parse_manifest(good + 'z'), "manifest size mismatch");
        REQUIRE_THROWS_WITH(parse_manifest(good.substr(0, 10)),
                            "not a deployment manifest");
    }

    SECTION("golden output tampering survives the checksum but fails replay") {
        // the payload ends with the final golden's output code; rewrite it
        // and re-seal so only the replay check can catch the damage
        std::string payload = good.substr(12, good.size() - 16);
        payload[payload.size() - 4] = char(payload[payload.size() - 4] ^ 1);
        const std::string resealed = detail::seal(payload);
        REQUIRE_NOTHROW(parse_manifest(resealed));
        REQUIRE_THROWS_WITH(verify_manifest(resealed), "golden vector replay mismatch");
    }

    SECTION("multiplier drift is re-derived from the stored scales") {
        QuantLstm q = fresh_lstm(62);
        q.e.m_head.right_shift += 1;
        const std::string drifted = serialize_manifest(q);
        REQUIRE_NOTHROW(parse_manifest(drifted));
        REQUIRE_THROWS_WITH(verify_manifest(drifted),
                            "multiplier drifted from scales: head");
    }
}

TEST_CASE("loaded manifests drive the engine exactly like the source model") {
    const QuantTransformer q = fresh_transformer(71);
    const LoadedManifest m = parse_manifest(serialize_manifest(q));
    Rng rng(4171);
    for (int trial = 0; trial < 16; ++trial) {
        const auto x = random_window(rng, q.cfg.input_len);
        REQUIRE(run_transformer_int(m.transformer, x) == run_transformer_int(q, x));
    }
}

TEST_CASE("checkpoints restore parameters exactly") {
    auto m = make_lstm(6, 8, 33);
    m.store[m.w_head].v[0] = 0.123456789;
    const std::string bytes = save_checkpoint(m);

    const CheckpointHeader h = checkpoint_header(bytes);
    REQUIRE(h.arch == ArchKind::Lstm);
    REQUIRE(h.input_len == 6);
    REQUIRE(h.width == 8);

    const LstmModel back = load_lstm_checkpoint(bytes);
    REQUIRE(back.store.params.size() == m.store.params.size());
    for (size_t p = 0; p < m.store.params.size(); ++p)
        REQUIRE(back.store.params[p].v == m.store.params[p].v);

    auto tf = make_transformer(6, 8, 34);
    const std::string tf_bytes = save_checkpoint(tf);
    const TransformerModel tf_back = load_transformer_checkpoint(tf_bytes);
    for (size_t p = 0; p < tf.store.params.size(); ++p)
        REQUIRE(tf_back.store.params[p].v == tf.store.params[p].v);

    SECTION("architecture mismatch is rejected") {
        REQUIRE_THROWS_WITH(load_transformer_checkpoint(bytes),
                            "checkpoint architecture mismatch");
        REQUIRE_THROWS_WITH(load_lstm_checkpoint(tf_bytes),
                            "checkpoint architecture mismatch");
    }

    SECTION("corruption is rejected") {
        std::string bad = bytes;
        bad[20] = char(bad[20] ^ 0x10);
        REQUIRE_THROWS_WITH(load_lstm_checkpoint(bad), "checkpoint checksum mismatch");
        REQUIRE_THROWS_WITH(load_lstm_checkpoint(std::string("EOFX") + bytes),
                            "not a checkpoint");
    }
}

TEST_CASE("binary file helpers round-trip") {
    const std::string path = "tmp_manifest_roundtrip.bin";
    const std::string bytes = serialize_manifest(fresh_lstm(81));
    write_binary_file(path, bytes);
    REQUIRE(read_binary_file(path) == bytes);
    std::remove(path.c_str());
    REQUIRE_THROWS_AS(read_binary_file("/nonexistent/dir/m.bin"), std::runtime_error);
    REQUIRE_THROWS_AS(write_binary_file("/nonexistent/dir/m.bin", bytes),
                      std::runtime_error);
}
