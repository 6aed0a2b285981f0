#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgecast/int_infer.hpp"
#include "edgecast/model.hpp"
#include "edgecast/rng.hpp"

namespace edgecast {

namespace detail {

inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

inline uint32_t crc32(const std::string& s) {
    return crc32(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

// explicit little-endian packing so files are identical across hosts
struct ByteWriter {
    std::string buf;

    void u8(uint8_t v) { buf.push_back(char(v)); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xFFu));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xFFu));
    }
    void i32(int32_t v) { u32(uint32_t(v)); }
    void i64(int64_t v) { u64(uint64_t(v)); }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

    void qp(const QuantParams& q) {
        f64(q.scale);
        i32(q.zero_point);
        i32(q.bitwidth);
        u8(q.is_signed ? 1 : 0);
    }
    void mult(const FixedPointMultiplier& m) {
        i32(m.mantissa);
        i32(m.right_shift);
    }
    void kernel(const ActKernel& k) {
        i64(k.a_fx);
        i64(k.c_fx);
        i32(k.zp_in);
        i32(k.zp_out);
        i32(k.lo);
        i32(k.hi);
    }
    void ivec(const std::vector<int32_t>& v) {
        u32(uint32_t(v.size()));
        for (int32_t x : v) i32(x);
    }
    void fmat(const std::vector<std::vector<double>>& m) {
        u32(uint32_t(m.size()));
        u32(m.empty() ? 0u : uint32_t(m[0].size()));
        for (const auto& row : m)
            for (double x : row) f64(x);
    }
};

struct ByteReader {
    const std::string& buf;
    size_t pos = 0;

    explicit ByteReader(const std::string& b) : buf(b) {}

    void need(size_t n) const {
        if (pos + n > buf.size()) throw std::runtime_error("manifest truncated");
    }
    uint8_t u8() {
        need(1);
        return uint8_t(buf[pos++]);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(buf[pos++])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(buf[pos++])) << (8 * i);
        return v;
    }
    int32_t i32() { return int32_t(u32()); }
    int64_t i64() { return int64_t(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }

    QuantParams qp() {
        QuantParams q;
        q.scale = f64();
        q.zero_point = i32();
        q.bitwidth = int(i32());
        q.is_signed = u8() != 0;
        return q;
    }
    FixedPointMultiplier mult() {
        FixedPointMultiplier m;
        m.mantissa = i32();
        m.right_shift = int(i32());
        return m;
    }
    ActKernel kernel() {
        ActKernel k;
        k.a_fx = i64();
        k.c_fx = i64();
        k.zp_in = i32();
        k.zp_out = i32();
        k.lo = i32();
        k.hi = i32();
        return k;
    }
    std::vector<int32_t> ivec() {
        const uint32_t n = u32();
        need(size_t(n) * 4);
        std::vector<int32_t> v(n);
        for (auto& x : v) x = i32();
        return v;
    }
    std::vector<std::vector<double>> fmat() {
        const uint32_t rows = u32(), cols = u32();
        need(size_t(rows) * cols * 8);
        std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
        for (auto& row : m)
            for (auto& x : row) x = f64();
        return m;
    }
};

inline void write_lstm_edges(ByteWriter& w, const LstmEdges& e) {
    w.i32(e.bitwidth);
    w.qp(e.in);
    w.qp(e.c);
    w.qp(e.h);
    w.qp(e.out);
    for (const auto& g : e.gate) w.qp(g);
    w.qp(e.unit);
    w.qp(e.sym);
    for (const auto& q : e.w) w.qp(q);
    w.qp(e.wh);
    for (double s : e.s_gate) w.f64(s);
    w.f64(e.s_head);
    w.f64(e.s_fc);
    w.f64(e.s_ig);
    w.f64(e.s_oth);
    w.mult(e.m_h2in);
    w.mult(e.m_fc);
    w.mult(e.m_ig);
    w.mult(e.m_oth);
    w.mult(e.m_head);
    for (const auto& m : e.m_gate) w.mult(m);
    for (const auto& k : e.k_gate) w.kernel(k);
    w.kernel(e.k_ctanh);
}

inline LstmEdges read_lstm_edges(ByteReader& r) {
    LstmEdges e;
    e.bitwidth = int(r.i32());
    e.in = r.qp();
    e.c = r.qp();
    e.h = r.qp();
    e.out = r.qp();
    for (auto& g : e.gate) g = r.qp();
    e.unit = r.qp();
    e.sym = r.qp();
    for (auto& q : e.w) q = r.qp();
    e.wh = r.qp();
    for (auto& s : e.s_gate) s = r.f64();
    e.s_head = r.f64();
    e.s_fc = r.f64();
    e.s_ig = r.f64();
    e.s_oth = r.f64();
    e.m_h2in = r.mult();
    e.m_fc = r.mult();
    e.m_ig = r.mult();
    e.m_oth = r.mult();
    e.m_head = r.mult();
    for (auto& m : e.m_gate) m = r.mult();
    for (auto& k : e.k_gate) k = r.kernel();
    e.k_ctanh = r.kernel();
    return e;
}

inline void write_transformer_edges(ByteWriter& w, const TransformerEdges& e) {
    w.i32(e.bitwidth);
    w.qp(e.in);
    w.qp(e.tok);
    w.qp(e.q);
    w.qp(e.k);
    w.qp(e.v);
    w.qp(e.score);
    w.qp(e.res1);
    w.qp(e.f1);
    w.qp(e.res2);
    w.qp(e.out);
    w.qp(e.attn);
    w.qp(e.sym);
    w.qp(e.w_in);
    w.qp(e.w_q);
    w.qp(e.w_k);
    w.qp(e.w_v);
    w.qp(e.w_f1);
    w.qp(e.w_f2);
    w.qp(e.w_head);
    w.f64(e.s_tok);
    w.f64(e.s_q);
    w.f64(e.s_k);
    w.f64(e.s_v);
    w.f64(e.s_score);
    w.f64(e.s_ctx);
    w.f64(e.s_f1);
    w.f64(e.s_f2);
    w.f64(e.s_head);
    w.mult(e.m_tok);
    w.mult(e.m_q);
    w.mult(e.m_k);
    w.mult(e.m_v);
    w.mult(e.m_score);
    w.mult(e.m_ctx);
    w.mult(e.m_tok_res1);
    w.mult(e.m_f1);
    w.mult(e.m_f2);
    w.mult(e.m_res1_res2);
    w.mult(e.m_head);
    w.i64(e.k_q16);
    w.kernel(e.k_f1tanh);
    w.fmat(e.pe);
}

inline TransformerEdges read_transformer_edges(ByteReader& r) {
    TransformerEdges e;
    e.bitwidth = int(r.i32());
    e.in = r.qp();
    e.tok = r.qp();
    e.q = r.qp();
    e.k = r.qp();
    e.v = r.qp();
    e.score = r.qp();
    e.res1 = r.qp();
    e.f1 = r.qp();
    e.res2 = r.qp();
    e.out = r.qp();
    e.attn = r.qp();
    e.sym = r.qp();
    e.w_in = r.qp();
    e.w_q = r.qp();
    e.w_k = r.qp();
    e.w_v = r.qp();
    e.w_f1 = r.qp();
    e.w_f2 = r.qp();
    e.w_head = r.qp();
    e.s_tok = r.f64();
    e.s_q = r.f64();
    e.s_k = r.f64();
    e.s_v = r.f64();
    e.s_score = r.f64();
    e.s_ctx = r.f64();
    e.s_f1 = r.f64();
    e.s_f2 = r.f64();
    e.s_head = r.f64();
    e.m_tok = r.mult();
    e.m_q = r.mult();
    e.m_k = r.mult();
    e.m_v = r.mult();
    e.m_score = r.mult();
    e.m_ctx = r.mult();
    e.m_tok_res1 = r.mult();
    e.m_f1 = r.mult();
    e.m_f2 = r.mult();
    e.m_res1_res2 = r.mult();
    e.m_head = r.mult();
    e.k_q16 = r.i64();
    e.k_f1tanh = r.kernel();
    e.pe = r.fmat();
    return e;
}

constexpr uint32_t kManifestVersion = 1;
constexpr uint32_t kCheckpointVersion = 1;
constexpr int kGoldenCount = 16;

inline uint8_t arch_tag(ArchKind a) { return a == ArchKind::Lstm ? 0 : 1; }

inline ArchKind arch_from_tag(uint8_t t) {
    if (t == 0) return ArchKind::Lstm;
    if (t == 1) return ArchKind::Transformer;
    throw std::runtime_error("unknown architecture tag");
}

template <typename Q, typename RunFn>
std::vector<InferenceTrace> make_goldens(const Q& q, RunFn run) {
    Rng rng(derive_seed(0x601d, uint64_t(q.cfg.input_len) << 8 | uint64_t(q.e.bitwidth)));
    std::vector<InferenceTrace> out;
    for (int g = 0; g < kGoldenCount; ++g) {
        std::vector<double> x(size_t(q.cfg.input_len), 0.0);
        for (auto& v : x) {
            const int32_t code = int32_t(rng.randint(q.e.in.qmin(), q.e.in.qmax()));
            v = dequantize_value(code, q.e.in);
        }
        InferenceTrace t;
        run(q, x, &t);
        out.push_back(std::move(t));
    }
    return out;
}

inline void write_goldens(ByteWriter& w, const std::vector<InferenceTrace>& gs) {
    w.u32(uint32_t(gs.size()));
    for (const auto& g : gs) {
        w.ivec(g.input);
        w.i32(g.output);
    }
}

inline std::vector<InferenceTrace> read_goldens(ByteReader& r) {
    const uint32_t n = r.u32();
    std::vector<InferenceTrace> gs(n);
    for (auto& g : gs) {
        g.input = r.ivec();
        g.output = r.i32();
    }
    return gs;
}

inline std::string seal(const std::string& payload) {
    ByteWriter w;
    w.buf.append("EOFM");
    w.u32(kManifestVersion);
    w.u32(uint32_t(payload.size()));
    w.buf.append(payload);
    w.u32(crc32(payload));
    return std::move(w.buf);
}

inline std::string unseal(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "EOFM") != 0)
        throw std::runtime_error("not a deployment manifest");
    ByteReader r(bytes);
    r.pos = 4;
    const uint32_t version = r.u32();
    if (version != kManifestVersion)
        throw std::runtime_error("unsupported manifest version");
    const uint32_t payload_size = r.u32();
    if (bytes.size() != 12 + size_t(payload_size) + 4)
        throw std::runtime_error("manifest size mismatch");
    const std::string payload = bytes.substr(12, payload_size);
    r.pos = 12 + payload_size;
    if (r.u32() != crc32(payload)) throw std::runtime_error("manifest checksum mismatch");
    return payload;
}

inline double mult_value(const FixedPointMultiplier& m) {
    return double(m.mantissa) * std::ldexp(1.0, -31 - m.right_shift);
}

inline void check_mult(const FixedPointMultiplier& stored, double ratio,
                       const char* name) {
    const FixedPointMultiplier fresh = FixedPointMultiplier::from_double(ratio);
    if (std::abs(mult_value(fresh) - mult_value(stored)) > std::ldexp(1.0, -30))
        throw std::runtime_error(std::string("multiplier drifted from scales: ") + name);
}

inline void verify_lstm_multipliers(const LstmEdges& e) {
    check_mult(e.m_h2in, e.h.scale / e.in.scale, "h2in");
    static const char* gate_names[4] = {"gate_i", "gate_f", "gate_g", "gate_o"};
    for (int k = 0; k < 4; ++k)
        check_mult(e.m_gate[size_t(k)], e.s_gate[size_t(k)] / e.gate[size_t(k)].scale,
                   gate_names[k]);
    check_mult(e.m_fc, e.s_fc / e.c.scale, "fc");
    check_mult(e.m_ig, e.s_ig / e.c.scale, "ig");
    check_mult(e.m_oth, e.s_oth / e.h.scale, "oth");
    check_mult(e.m_head, e.s_head / e.out.scale, "head");
}

inline void verify_transformer_multipliers(const TransformerEdges& e) {
    check_mult(e.m_tok, e.s_tok / e.tok.scale, "tok");
    check_mult(e.m_q, e.s_q / e.q.scale, "q");
    check_mult(e.m_k, e.s_k / e.k.scale, "k");
    check_mult(e.m_v, e.s_v / e.v.scale, "v");
    check_mult(e.m_score, e.s_score / e.score.scale, "score");
    check_mult(e.m_ctx, e.s_ctx / e.res1.scale, "ctx");
    check_mult(e.m_tok_res1, e.tok.scale / e.res1.scale, "tok_res1");
    check_mult(e.m_f1, e.s_f1 / e.f1.scale, "f1");
    check_mult(e.m_f2, e.s_f2 / e.res2.scale, "f2");
    check_mult(e.m_res1_res2, e.res1.scale / e.res2.scale, "res1_res2");
    check_mult(e.m_head, e.s_head / e.out.scale, "head");
}

}  // namespace detail

struct LoadedManifest {
    ArchKind arch = ArchKind::Lstm;
    QuantLstm lstm;
    QuantTransformer transformer;
    std::vector<InferenceTrace> goldens;

    const NetConfig& cfg() const {
        return arch == ArchKind::Lstm ? lstm.cfg : transformer.cfg;
    }
    int bitwidth() const {
        return arch == ArchKind::Lstm ? lstm.e.bitwidth : transformer.e.bitwidth;
    }
};

inline std::string serialize_manifest(const QuantLstm& q) {
    detail::ByteWriter w;
    w.u8(detail::arch_tag(ArchKind::Lstm));
    w.i32(q.cfg.input_len);
    w.i32(q.cfg.width);
    detail::write_lstm_edges(w, q.e);
    for (const auto& t : q.w) w.ivec(t);
    for (const auto& t : q.b) w.ivec(t);
    w.ivec(q.wh);
    w.i32(q.bh);
    detail::write_goldens(
        w, detail::make_goldens(q, [](const QuantLstm& m, const std::vector<double>& x,
                                      InferenceTrace* t) { run_lstm_int(m, x, t); }));
    return detail::seal(w.buf);
}

inline std::string serialize_manifest(const QuantTransformer& q) {
    detail::ByteWriter w;
    w.u8(detail::arch_tag(ArchKind::Transformer));
    w.i32(q.cfg.input_len);
    w.i32(q.cfg.width);
    detail::write_transformer_edges(w, q.e);
    w.ivec(q.w_in);
    w.ivec(q.b_in);
    w.ivec(q.w_q);
    w.ivec(q.b_q);
    w.ivec(q.w_k);
    w.ivec(q.b_k);
    w.ivec(q.w_v);
    w.ivec(q.b_v);
    w.ivec(q.w_f1);
    w.ivec(q.b_f1);
    w.ivec(q.w_f2);
    w.ivec(q.b_f2);
    w.ivec(q.w_head);
    w.i32(q.b_head);
    w.u32(uint32_t(q.pe.size()));
    for (const auto& row : q.pe) w.ivec(row);
    detail::write_goldens(
        w, detail::make_goldens(
               q, [](const QuantTransformer& m, const std::vector<double>& x,
                     InferenceTrace* t) { run_transformer_int(m, x, t); }));
    return detail::seal(w.buf);
}

inline LoadedManifest parse_manifest(const std::string& bytes) {
    const std::string payload = detail::unseal(bytes);
    detail::ByteReader r(payload);
    LoadedManifest m;
    m.arch = detail::arch_from_tag(r.u8());
    const int n = int(r.i32());
    const int width = int(r.i32());
    if (n < 1 || width < 1) throw std::runtime_error("manifest config out of range");
    if (m.arch == ArchKind::Lstm) {
        QuantLstm& q = m.lstm;
        q.cfg = NetConfig{ArchKind::Lstm, n, width};
        q.e = detail::read_lstm_edges(r);
        for (auto& t : q.w) t = r.ivec();
        for (auto& t : q.b) t = r.ivec();
        q.wh = r.ivec();
        q.bh = r.i32();
        const size_t cols = size_t(width) + 1;
        for (const auto& t : q.w)
            if (t.size() != size_t(width) * cols)
                throw std::runtime_error("manifest weight shape mismatch");
        for (const auto& t : q.b)
            if (t.size() != size_t(width))
                throw std::runtime_error("manifest weight shape mismatch");
        if (q.wh.size() != size_t(width))
            throw std::runtime_error("manifest weight shape mismatch");
    } else {
        QuantTransformer& q = m.transformer;
        q.cfg = NetConfig{ArchKind::Transformer, n, width};
        q.e = detail::read_transformer_edges(r);
        q.w_in = r.ivec();
        q.b_in = r.ivec();
        q.w_q = r.ivec();
        q.b_q = r.ivec();
        q.w_k = r.ivec();
        q.b_k = r.ivec();
        q.w_v = r.ivec();
        q.b_v = r.ivec();
        q.w_f1 = r.ivec();
        q.b_f1 = r.ivec();
        q.w_f2 = r.ivec();
        q.b_f2 = r.ivec();
        q.w_head = r.ivec();
        q.b_head = r.i32();
        const uint32_t rows = r.u32();
        if (int(rows) != n) throw std::runtime_error("manifest weight shape mismatch");
        q.pe.resize(rows);
        for (auto& row : q.pe) {
            row = r.ivec();
            if (row.size() != size_t(width))
                throw std::runtime_error("manifest weight shape mismatch");
        }
        const size_t d = size_t(width);
        if (q.w_in.size() != d || q.b_in.size() != d || q.w_q.size() != d * d ||
            q.w_k.size() != d * d || q.w_v.size() != d * d || q.b_q.size() != d ||
            q.b_k.size() != d || q.b_v.size() != d || q.w_f1.size() != 4 * d * d ||
            q.b_f1.size() != 4 * d || q.w_f2.size() != d * 4 * d ||
            q.b_f2.size() != d || q.w_head.size() != d)
            throw std::runtime_error("manifest weight shape mismatch");
    }
    m.goldens = detail::read_goldens(r);
    if (r.pos != payload.size()) throw std::runtime_error("manifest has trailing bytes");
    return m;
}

// full integrity check: header, checksum, multiplier re-derivation from the
// stored scales, then bit-exact replay of the embedded golden vectors
inline LoadedManifest verify_manifest(const std::string& bytes) {
    LoadedManifest m = parse_manifest(bytes);
    if (m.arch == ArchKind::Lstm) {
        detail::verify_lstm_multipliers(m.lstm.e);
        for (const auto& g : m.goldens) {
            std::vector<double> x(g.input.size());
            for (size_t i = 0; i < x.size(); ++i)
                x[i] = dequantize_value(g.input[i], m.lstm.e.in);
            InferenceTrace t;
            const int32_t out = run_lstm_int(m.lstm, x, &t);
            if (t.input != g.input || out != g.output)
                throw std::runtime_error("golden vector replay mismatch");
        }
    } else {
        detail::verify_transformer_multipliers(m.transformer.e);
        for (const auto& g : m.goldens) {
            std::vector<double> x(g.input.size());
            for (size_t i = 0; i < x.size(); ++i)
                x[i] = dequantize_value(g.input[i], m.transformer.e.in);
            InferenceTrace t;
            const int32_t out = run_transformer_int(m.transformer, x, &t);
            if (t.input != g.input || out != g.output)
                throw std::runtime_error("golden vector replay mismatch");
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// training checkpoints: raw parameter values, same framing as the manifest

namespace detail {

template <typename Model>
std::string serialize_params(const Model& m, ArchKind arch) {
    ByteWriter w;
    w.buf.append("EOFC");
    w.u32(kCheckpointVersion);
    ByteWriter p;
    p.u8(arch_tag(arch));
    p.i32(m.cfg.input_len);
    p.i32(m.cfg.width);
    p.u32(uint32_t(m.store.params.size()));
    for (const auto& t : m.store.params) {
        p.u32(uint32_t(t.v.size()));
        for (double v : t.v) p.f64(v);
    }
    w.u32(uint32_t(p.buf.size()));
    w.buf.append(p.buf);
    w.u32(crc32(p.buf));
    return std::move(w.buf);
}

inline std::string unseal_checkpoint(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "EOFC") != 0)
        throw std::runtime_error("not a checkpoint");
    ByteReader r(bytes);
    r.pos = 4;
    if (r.u32() != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version");
    const uint32_t payload_size = r.u32();
    if (bytes.size() != 12 + size_t(payload_size) + 4)
        throw std::runtime_error("checkpoint truncated");
    const std::string payload = bytes.substr(12, payload_size);
    r.pos = 12 + payload_size;
    if (r.u32() != crc32(payload)) throw std::runtime_error("checkpoint checksum mismatch");
    return payload;
}

template <typename Model>
void fill_params(Model& m, ByteReader& r) {
    const uint32_t count = r.u32();
    if (count != m.store.params.size())
        throw std::runtime_error("checkpoint parameter count mismatch");
    for (auto& t : m.store.params) {
        const uint32_t n = r.u32();
        if (n != t.v.size()) throw std::runtime_error("checkpoint tensor size mismatch");
        for (auto& v : t.v) v = r.f64();
    }
}

}  // namespace detail

inline std::string save_checkpoint(const LstmModel& m) {
    return detail::serialize_params(m, ArchKind::Lstm);
}

inline std::string save_checkpoint(const TransformerModel& m) {
    return detail::serialize_params(m, ArchKind::Transformer);
}

struct CheckpointHeader {
    ArchKind arch = ArchKind::Lstm;
    int input_len = 0;
    int width = 0;
};

inline CheckpointHeader checkpoint_header(const std::string& bytes) {
    const std::string payload = detail::unseal_checkpoint(bytes);
    detail::ByteReader r(payload);
    CheckpointHeader h;
    h.arch = detail::arch_from_tag(r.u8());
    h.input_len = int(r.i32());
    h.width = int(r.i32());
    return h;
}

inline LstmModel load_lstm_checkpoint(const std::string& bytes) {
    const std::string payload = detail::unseal_checkpoint(bytes);
    detail::ByteReader r(payload);
    if (detail::arch_from_tag(r.u8()) != ArchKind::Lstm)
        throw std::runtime_error("checkpoint architecture mismatch");
    const int n = int(r.i32());
    const int width = int(r.i32());
    LstmModel m = make_lstm(n, width, 0);
    detail::fill_params(m, r);
    return m;
}

inline TransformerModel load_transformer_checkpoint(const std::string& bytes) {
    const std::string payload = detail::unseal_checkpoint(bytes);
    detail::ByteReader r(payload);
    if (detail::arch_from_tag(r.u8()) != ArchKind::Transformer)
        throw std::runtime_error("checkpoint architecture mismatch");
    const int n = int(r.i32());
    const int width = int(r.i32());
    TransformerModel m = make_transformer(n, width, 0);
    detail::fill_params(m, r);
    return m;
}

// ---------------------------------------------------------------------------

inline std::string read_binary_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)),
                      std::istreambuf_iterator<char>());
    if (f.bad()) throw std::runtime_error("read failed on " + path);
    return bytes;
}

inline void write_binary_file(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("write failed on " + path);
}

}  // namespace edgecast
