#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgecast/config.hpp"

namespace edgecast {

struct HardwareBudget {
    int luts = 8000;
    int bram_kbits = 360;
    int dsp_slices = 20;
    double clock_hz = 1.0e8;

    int bram_blocks() const { return bram_kbits * 1024 / (18 * 1024); }
};

struct ResourceEstimate {
    double luts_pct = 0.0;
    double bram_pct = 0.0;
    double dsp_pct = 0.0;
};

struct CostEstimate {
    double latency_ms = 0.0;
    double power_mw = 0.0;
    double energy_mj = 0.0;
};

struct Feasibility {
    bool feasible = true;
    double total_violation = 0.0;
    std::vector<std::string> violations;
};

// per-architecture fitted constants: cycle model and LUT occupancy model
struct ArchCostParams {
    double eta = 0.0;       // cycles per effective MAC at 8-bit
    double overhead = 0.0;  // cycles per scheduled op
    double lut_c0 = 0.0;
    double lut_cw = 0.0;
    double lut_cn = 0.0;
    double lut_cb = 0.0;
};

struct CostModelParams {
    ArchCostParams lstm;
    ArchCostParams transformer;
    // shared power model: P[mW] = p0 + c_lut*lut% + c_bram*bram% + c_dsp*dsp%
    double p0 = 0.0;
    double c_lut = 0.0;
    double c_bram = 0.0;
    double c_dsp = 0.0;

    const ArchCostParams& arch(ArchKind a) const {
        return a == ArchKind::Lstm ? lstm : transformer;
    }
};

inline int64_t count_macs(ArchKind arch, int n, int w) {
    const int64_t nn = n, ww = w;
    if (arch == ArchKind::Lstm) {
        // four gate matvecs over [x;h] plus gate biases, then the scalar head
        return nn * (4 * ww * (ww + 1) + 4 * ww) + ww;
    }
    // input proj + QKV + scores + context + FFN (d->4d->d) + head
    return nn * ww + 3 * nn * ww * ww + 2 * nn * nn * ww + 8 * nn * ww * ww + ww;
}

inline int dsp_used(ArchKind arch, int w) {
    if (arch == ArchKind::Lstm) return 11;
    return std::min(20, 11 + w);
}

inline int64_t op_count(ArchKind arch, int n) {
    return arch == ArchKind::Lstm ? 14 * int64_t(n) + 1 : 11 * int64_t(n);
}

inline int64_t param_count(ArchKind arch, int w) {
    const int64_t ww = w;
    if (arch == ArchKind::Lstm) return 4 * ww * (ww + 1) + 4 * ww + ww + 1;
    return 11 * ww * ww + 11 * ww + 1;
}

inline int64_t act_buffer_count(ArchKind arch, int n, int w) {
    const int64_t nn = n, ww = w;
    if (arch == ArchKind::Lstm) return 7 * ww + 1;
    return 4 * nn * ww + nn + 5 * ww;
}

inline int64_t storage_bits(ArchKind arch, int n, int w, int bitwidth) {
    return param_count(arch, w) * bitwidth + act_buffer_count(arch, n, w) * 32;
}

inline double bram_pct(ArchKind arch, int n, int w, int bitwidth,
                       const HardwareBudget& budget = {}) {
    const int64_t bits = storage_bits(arch, n, w, bitwidth);
    const int64_t blocks = (bits + 18 * 1024 - 1) / (18 * 1024);
    return 100.0 * double(blocks) / double(budget.bram_blocks());
}

inline double lut_pct(ArchKind arch, int n, int w, int bitwidth,
                      const CostModelParams& params) {
    const ArchCostParams& c = params.arch(arch);
    return c.lut_c0 + c.lut_cw * w + c.lut_cn * n + c.lut_cb * bitwidth;
}

inline double dsp_pct(ArchKind arch, int w, const HardwareBudget& budget = {}) {
    return 100.0 * double(dsp_used(arch, w)) / double(budget.dsp_slices);
}

inline ResourceEstimate estimate_resources(const NetConfig& cfg, int bitwidth,
                                           const CostModelParams& params,
                                           const HardwareBudget& budget = {}) {
    ResourceEstimate r;
    r.luts_pct = lut_pct(cfg.arch, cfg.input_len, cfg.width, bitwidth, params);
    r.bram_pct = bram_pct(cfg.arch, cfg.input_len, cfg.width, bitwidth, budget);
    r.dsp_pct = dsp_pct(cfg.arch, cfg.width, budget);
    return r;
}

inline double estimate_latency_ms(const NetConfig& cfg, int bitwidth,
                                  const CostModelParams& params,
                                  const HardwareBudget& budget = {}) {
    const ArchCostParams& c = params.arch(cfg.arch);
    const double macs = double(count_macs(cfg.arch, cfg.input_len, cfg.width));
    const double slots = double(dsp_used(cfg.arch, cfg.width));
    const double cycles = macs / slots * (bitwidth / 8.0) * c.eta +
                          double(op_count(cfg.arch, cfg.input_len)) * c.overhead;
    return cycles / budget.clock_hz * 1000.0;
}

inline double estimate_power_mw(const ResourceEstimate& r, const CostModelParams& params) {
    return params.p0 + params.c_lut * r.luts_pct + params.c_bram * r.bram_pct +
           params.c_dsp * r.dsp_pct;
}

inline double energy_mj(double power_mw, double latency_ms) {
    if (!std::isfinite(power_mw) || !std::isfinite(latency_ms))
        throw std::domain_error("energy: non-finite input");
    if (power_mw < 0.0 || latency_ms < 0.0)
        throw std::domain_error("energy: negative input");
    if (latency_ms == 0.0) return 0.0;
    return power_mw * latency_ms / 1000.0;
}

inline Feasibility check_feasibility(const ResourceEstimate& r) {
    Feasibility f;
    const std::pair<const char*, double> checks[] = {
        {"luts", r.luts_pct}, {"bram", r.bram_pct}, {"dsp", r.dsp_pct}};
    for (const auto& [name, pct] : checks) {
        if (pct > 100.0) {
            f.feasible = false;
            f.total_violation += pct - 100.0;
            std::ostringstream os;
            os << name << " " << pct << "% exceeds 100%";
            f.violations.push_back(os.str());
        }
    }
    return f;
}

struct TrialCost {
    ResourceEstimate resources;
    CostEstimate cost;
    Feasibility feasibility;
};

inline TrialCost estimate_cost(const NetConfig& cfg, int bitwidth,
                               const CostModelParams& params,
                               const HardwareBudget& budget = {}) {
    TrialCost t;
    t.resources = estimate_resources(cfg, bitwidth, params, budget);
    t.cost.latency_ms = estimate_latency_ms(cfg, bitwidth, params, budget);
    t.cost.power_mw = estimate_power_mw(t.resources, params);
    t.cost.energy_mj = energy_mj(t.cost.power_mw, t.cost.latency_ms);
    t.feasibility = check_feasibility(t.resources);
    return t;
}

// one row of the board-measurement table the cost model is fitted against
struct ReferenceRow {
    ArchKind arch = ArchKind::Lstm;
    int input_len = 0;
    int bitwidth = 0;
    int batch_size = 0;
    double learning_rate = 0.0;
    int width = 0;
    double fp32_mse = 0.0;
    double quant_mse = 0.0;
    double luts_pct = 0.0;
    double bram_pct = 0.0;
    double dsp_pct = 0.0;
    double power_mw = 0.0;
    double latency_ms = 0.0;
    double energy_mj = 0.0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        size_t start = field.find_first_not_of(' ');
        out.push_back(start == std::string::npos ? "" : field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace detail

inline std::vector<ReferenceRow> load_reference_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reference table: " + path);
    static const char* kHeader =
        "arch,input_len,bitwidth,batch_size,learning_rate,width,fp32_mse,quant_mse,"
        "luts_pct,brams_pct,dsps_pct,power_mw,latency_ms,energy_mj";
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw std::runtime_error(path + ": unexpected header '" + line + "'");
    std::vector<ReferenceRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 14)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 14 fields, got " + std::to_string(f.size()));
        ReferenceRow r;
        try {
            r.arch = arch_from_name(f[0]);
            r.input_len = std::stoi(f[1]);
            r.bitwidth = std::stoi(f[2]);
            r.batch_size = std::stoi(f[3]);
            r.learning_rate = std::stod(f[4]);
            r.width = std::stoi(f[5]);
            r.fp32_mse = std::stod(f[6]);
            r.quant_mse = std::stod(f[7]);
            r.luts_pct = std::stod(f[8]);
            r.bram_pct = std::stod(f[9]);
            r.dsp_pct = std::stod(f[10]);
            r.power_mw = std::stod(f[11]);
            r.latency_ms = std::stod(f[12]);
            r.energy_mj = std::stod(f[13]);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    return rows;
}

struct RidgeFit {
    std::vector<double> coeffs;
    std::vector<int> dropped;
};

namespace detail {

// solve a small dense symmetric system by Gaussian elimination with partial pivoting
inline std::vector<double> solve_dense(std::vector<std::vector<double>> m,
                                       std::vector<double> rhs) {
    const size_t k = rhs.size();
    for (size_t col = 0; col < k; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < k; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
        if (std::fabs(m[pivot][col]) < 1e-300)
            throw std::runtime_error("singular system in calibration solve");
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (size_t r = col + 1; r < k; ++r) {
            const double factor = m[r][col] / m[col][col];
            for (size_t c = col; c < k; ++c) m[r][c] -= factor * m[col][c];
            rhs[r] -= factor * rhs[col];
        }
    }
    std::vector<double> x(k, 0.0);
    for (size_t r = k; r-- > 0;) {
        double acc = rhs[r];
        for (size_t c = r + 1; c < k; ++c) acc -= m[r][c] * x[c];
        x[r] = acc / m[r][r];
    }
    return x;
}

}  // namespace detail

// weighted ridge regression with nonnegativity enforced by iteratively dropping
// the most negative coefficient; a dropped term clamps to zero and is reported
inline RidgeFit ridge_nnls(const std::vector<std::vector<double>>& a,
                           const std::vector<double>& y,
                           const std::vector<double>& w,
                           bool normalize_columns) {
    constexpr double kRidge = 1e-6;
    const size_t m = a.size();
    if (m == 0) throw std::invalid_argument("ridge_nnls: no rows");
    const size_t k = a[0].size();
    if (y.size() != m || w.size() != m)
        throw std::invalid_argument("ridge_nnls: size mismatch");

    std::vector<double> scale(k, 1.0);
    if (normalize_columns) {
        for (size_t j = 0; j < k; ++j) {
            double mx = 0.0;
            for (size_t i = 0; i < m; ++i) mx = std::max(mx, std::fabs(a[i][j]));
            scale[j] = mx == 0.0 ? 1.0 : mx;
        }
    }

    std::vector<int> active(k);
    for (size_t j = 0; j < k; ++j) active[j] = int(j);
    RidgeFit fit;
    fit.coeffs.assign(k, 0.0);

    while (!active.empty()) {
        const size_t ka = active.size();
        std::vector<std::vector<double>> g(ka, std::vector<double>(ka, 0.0));
        std::vector<double> rhs(ka, 0.0);
        for (size_t i = 0; i < m; ++i) {
            for (size_t r = 0; r < ka; ++r) {
                const double ar = a[i][active[r]] / scale[active[r]] * w[i];
                rhs[r] += ar * y[i] * w[i];
                for (size_t c = 0; c < ka; ++c)
                    g[r][c] += ar * (a[i][active[c]] / scale[active[c]] * w[i]);
            }
        }
        double max_diag = 0.0;
        for (size_t r = 0; r < ka; ++r) max_diag = std::max(max_diag, g[r][r]);
        const double lam = kRidge * max_diag;
        for (size_t r = 0; r < ka; ++r) g[r][r] += lam;

        std::vector<double> beta = detail::solve_dense(std::move(g), std::move(rhs));
        size_t worst = ka;
        double worst_val = -1e-12;
        for (size_t r = 0; r < ka; ++r) {
            if (beta[r] < worst_val) {
                worst_val = beta[r];
                worst = r;
            }
        }
        if (worst == ka) {
            for (size_t r = 0; r < ka; ++r)
                fit.coeffs[active[r]] = std::max(0.0, beta[r]) / scale[active[r]];
            return fit;
        }
        fit.dropped.push_back(active[worst]);
        active.erase(active.begin() + long(worst));
    }
    return fit;
}

struct CalibrationReport {
    double max_power_residual_pct = 0.0;
    double max_latency_residual_pct = 0.0;
    double max_lut_residual_pct = 0.0;
    std::vector<int> power_dropped;
    std::vector<int> lut_dropped_lstm;
    std::vector<int> lut_dropped_transformer;
};

namespace detail {

inline double latency_design_mac_term(const ReferenceRow& r) {
    return double(count_macs(r.arch, r.input_len, r.width)) /
           double(dsp_used(r.arch, r.width)) * (r.bitwidth / 8.0);
}

inline RidgeFit fit_power(const std::vector<ReferenceRow>& rows) {
    std::vector<std::vector<double>> a;
    std::vector<double> y, w;
    for (const auto& r : rows) {
        a.push_back({1.0, r.luts_pct, r.bram_pct, r.dsp_pct});
        y.push_back(r.power_mw);
        w.push_back(1.0 / r.power_mw);
    }
    return ridge_nnls(a, y, w, true);
}

inline RidgeFit fit_latency(const std::vector<ReferenceRow>& rows, double clock_hz) {
    std::vector<std::vector<double>> a;
    std::vector<double> y, w;
    for (const auto& r : rows) {
        a.push_back({latency_design_mac_term(r), double(op_count(r.arch, r.input_len))});
        const double cycles = r.latency_ms / 1000.0 * clock_hz;
        y.push_back(cycles);
        w.push_back(1.0 / cycles);
    }
    return ridge_nnls(a, y, w, false);
}

inline RidgeFit fit_lut(const std::vector<ReferenceRow>& rows) {
    std::vector<std::vector<double>> a;
    std::vector<double> y, w;
    for (const auto& r : rows) {
        a.push_back({1.0, double(r.width), double(r.input_len), double(r.bitwidth)});
        y.push_back(r.luts_pct);
        w.push_back(1.0 / r.luts_pct);
    }
    return ridge_nnls(a, y, w, true);
}

}  // namespace detail

inline CostModelParams calibrate(const std::vector<ReferenceRow>& rows,
                                 CalibrationReport* report = nullptr,
                                 const HardwareBudget& budget = {}) {
    std::vector<ReferenceRow> lstm_rows, tf_rows;
    for (const auto& r : rows)
        (r.arch == ArchKind::Lstm ? lstm_rows : tf_rows).push_back(r);
    if (lstm_rows.empty() || tf_rows.empty())
        throw std::runtime_error("calibrate: reference table must cover both architectures");

    CostModelParams p;
    CalibrationReport rep;

    RidgeFit power = detail::fit_power(rows);
    p.p0 = power.coeffs[0];
    p.c_lut = power.coeffs[1];
    p.c_bram = power.coeffs[2];
    p.c_dsp = power.coeffs[3];
    rep.power_dropped = power.dropped;

    for (ArchKind arch : {ArchKind::Lstm, ArchKind::Transformer}) {
        const auto& sub = arch == ArchKind::Lstm ? lstm_rows : tf_rows;
        ArchCostParams& ap = arch == ArchKind::Lstm ? p.lstm : p.transformer;
        RidgeFit lat = detail::fit_latency(sub, budget.clock_hz);
        ap.eta = lat.coeffs[0];
        ap.overhead = lat.coeffs[1];
        RidgeFit lut = detail::fit_lut(sub);
        ap.lut_c0 = lut.coeffs[0];
        ap.lut_cw = lut.coeffs[1];
        ap.lut_cn = lut.coeffs[2];
        ap.lut_cb = lut.coeffs[3];
        (arch == ArchKind::Lstm ? rep.lut_dropped_lstm : rep.lut_dropped_transformer) =
            lut.dropped;
    }

    for (const auto& r : rows) {
        const NetConfig cfg{r.arch, r.input_len, r.width};
        ResourceEstimate res{r.luts_pct, r.bram_pct, r.dsp_pct};
        const double p_hat = estimate_power_mw(res, p);
        rep.max_power_residual_pct = std::max(
            rep.max_power_residual_pct, std::fabs(p_hat - r.power_mw) / r.power_mw * 100.0);
        const double t_hat = estimate_latency_ms(cfg, r.bitwidth, p, budget);
        rep.max_latency_residual_pct =
            std::max(rep.max_latency_residual_pct,
                     std::fabs(t_hat - r.latency_ms) / r.latency_ms * 100.0);
        const double l_hat = lut_pct(r.arch, r.input_len, r.width, r.bitwidth, p);
        rep.max_lut_residual_pct = std::max(
            rep.max_lut_residual_pct, std::fabs(l_hat - r.luts_pct) / r.luts_pct * 100.0);
    }
    if (report) *report = rep;
    return p;
}

}  // namespace edgecast
