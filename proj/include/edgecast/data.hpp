#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgecast/rng.hpp"

namespace edgecast {

constexpr int64_t kSecondsPerHour = 3600;
constexpr double kLevelMin = 0.0;
constexpr double kLevelMax = 6.0;

namespace detail {

// Howard Hinnant's civil-date algorithms, days since 1970-01-01
inline int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

inline void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    d = int(doy - (153 * mp + 2) / 5 + 1);
    m = int(mp + (mp < 10 ? 3 : -9));
    y = int(yoe + era * 400 + (m <= 2 ? 1 : 0));
}

}  // namespace detail

inline int64_t parse_iso8601(const std::string& s) {
    int y, mo, d, h, mi, se;
    char t;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &t, &h, &mi, &se) != 7 ||
        (t != 'T' && t != ' '))
        throw std::invalid_argument("bad ISO-8601 timestamp: " + s);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        se < 0 || se > 60)
        throw std::invalid_argument("out-of-range timestamp field: " + s);
    return (detail::days_from_civil(y, mo, d) * 24 + h) * 3600 + mi * 60 + se;
}

inline std::string format_iso8601(int64_t t) {
    int64_t days = t / 86400;
    int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m, d,
                  (long long)(rem / 3600), (long long)(rem / 60 % 60), (long long)(rem % 60));
    return buf;
}

// hourly level series; segment_starts marks contiguous runs after gap handling
struct TimeSeries {
    std::vector<int64_t> timestamps;
    std::vector<double> levels;
    std::vector<size_t> segment_starts{0};
    size_t forward_filled = 0;

    size_t size() const { return levels.size(); }
    size_t segment_count() const { return segment_starts.size(); }

    std::vector<std::pair<size_t, size_t>> segments() const {
        std::vector<std::pair<size_t, size_t>> out;
        for (size_t i = 0; i < segment_starts.size(); ++i) {
            const size_t end =
                i + 1 < segment_starts.size() ? segment_starts[i + 1] : levels.size();
            out.emplace_back(segment_starts[i], end);
        }
        return out;
    }
};

inline TimeSeries load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "timestamp,level_m")
        throw std::runtime_error(path + ": expected header 'timestamp,level_m', got '" +
                                 line + "'");

    TimeSeries s;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'timestamp,level_m' row");
        int64_t t;
        double level;
        try {
            t = parse_iso8601(line.substr(0, comma));
            size_t used = 0;
            level = std::stod(line.substr(comma + 1), &used);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!std::isfinite(level) || level < kLevelMin || level > kLevelMax)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": level out of [0,6] range");
        if (!s.timestamps.empty()) {
            const int64_t delta = t - s.timestamps.back();
            if (delta <= 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": non-increasing timestamp");
            if (delta % kSecondsPerHour != 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": non-hourly spacing");
            const int64_t gap_hours = delta / kSecondsPerHour;
            if (gap_hours > 1 && gap_hours <= 3) {
                // short outage: carry the last reading forward
                for (int64_t k = 1; k < gap_hours; ++k) {
                    s.timestamps.push_back(s.timestamps.back() + kSecondsPerHour);
                    s.levels.push_back(s.levels.back());
                    ++s.forward_filled;
                }
            } else if (gap_hours > 3) {
                s.segment_starts.push_back(s.levels.size());
            }
        }
        s.timestamps.push_back(t);
        s.levels.push_back(level);
    }
    if (s.levels.empty()) throw std::runtime_error(path + ": no data rows");
    return s;
}

inline void write_csv(const TimeSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write series: " + path);
    out << "timestamp,level_m\n";
    char buf[32];
    for (size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f", s.levels[i]);
        out << format_iso8601(s.timestamps[i]) << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct WindowedDataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    std::vector<size_t> target_index;  // raw position in the source series
    std::vector<size_t> segment_id;
    int window = 0;

    size_t size() const { return targets.size(); }
};

inline WindowedDataset make_windows(const TimeSeries& series, int n) {
    if (n < 1) throw std::invalid_argument("window length must be >= 1");
    WindowedDataset ds;
    ds.window = n;
    size_t seg = 0;
    for (const auto& [begin, end] : series.segments()) {
        if (end - begin > size_t(n)) {
            for (size_t i = begin; i + n < end; ++i) {
                ds.inputs.emplace_back(series.levels.begin() + long(i),
                                       series.levels.begin() + long(i + n));
                ds.targets.push_back(series.levels[i + n]);
                ds.target_index.push_back(i + n);
                ds.segment_id.push_back(seg);
            }
        }
        ++seg;
    }
    if (ds.size() == 0)
        throw std::runtime_error("series too short: no segment admits a full window");
    return ds;
}

struct SplitSpec {
    double train_fraction = 0.8;  // of the first part, in window counts
    double test_fraction = 0.2;   // of raw length, when the series is one segment
};

struct SplitDataset {
    WindowedDataset train;
    WindowedDataset val;
    WindowedDataset test;
};

namespace detail {

inline void append_window(WindowedDataset& dst, const WindowedDataset& src, size_t i) {
    dst.inputs.push_back(src.inputs[i]);
    dst.targets.push_back(src.targets[i]);
    dst.target_index.push_back(src.target_index[i]);
    dst.segment_id.push_back(src.segment_id[i]);
}

}  // namespace detail

// chronological partition: the final segment (or, for a single-segment series,
// the trailing test_fraction of raw indices) is held out as test, and the
// remaining windows split train/val by train_fraction without shuffling
inline SplitDataset chronological_split(const WindowedDataset& ds, size_t series_len,
                                        const SplitSpec& spec = {}) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must be in (0,1)");
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must be in (0,1)");

    const size_t last_segment =
        ds.segment_id.empty() ? 0 : ds.segment_id.back();
    const bool multi_segment = last_segment > 0;
    const size_t test_boundary =
        size_t(std::llround(double(series_len) * (1.0 - spec.test_fraction)));

    SplitDataset out;
    out.train.window = out.val.window = out.test.window = ds.window;

    std::vector<size_t> first_part;
    for (size_t i = 0; i < ds.size(); ++i) {
        const bool is_test = multi_segment ? ds.segment_id[i] == last_segment
                                           : ds.target_index[i] >= test_boundary;
        if (is_test)
            detail::append_window(out.test, ds, i);
        else
            first_part.push_back(i);
    }
    const size_t n_train =
        size_t(std::llround(double(first_part.size()) * spec.train_fraction));
    for (size_t k = 0; k < first_part.size(); ++k)
        detail::append_window(k < n_train ? out.train : out.val, ds, first_part[k]);

    if (out.train.size() == 0 || out.val.size() == 0 || out.test.size() == 0)
        throw std::runtime_error("split produced an empty partition");
    return out;
}

struct Normalizer {
    double mean = 0.0;
    double std = 1.0;

    double apply(double x) const { return (x - mean) / std; }
    double invert(double z) const { return z * std + mean; }
};

// z-score statistics over every value the training windows expose
inline Normalizer fit_normalizer(const WindowedDataset& train) {
    double sum = 0.0;
    size_t count = 0;
    for (const auto& row : train.inputs) {
        for (double v : row) sum += v;
        count += row.size();
    }
    for (double v : train.targets) sum += v;
    count += train.targets.size();
    if (count == 0) throw std::runtime_error("cannot fit normalizer on empty data");
    const double mean = sum / double(count);
    double ss = 0.0;
    for (const auto& row : train.inputs)
        for (double v : row) ss += (v - mean) * (v - mean);
    for (double v : train.targets) ss += (v - mean) * (v - mean);
    const double var = ss / double(count);
    if (var <= 1e-15 * std::max(1.0, mean * mean))
        throw std::runtime_error("constant series: normalizer std would be zero");
    return {mean, std::sqrt(var)};
}

inline WindowedDataset normalize_dataset(const WindowedDataset& ds, const Normalizer& nz) {
    WindowedDataset out = ds;
    for (auto& row : out.inputs)
        for (double& v : row) v = nz.apply(v);
    for (double& v : out.targets) v = nz.apply(v);
    return out;
}

inline double mse(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size())
        throw std::invalid_argument("mse: length mismatch");
    if (pred.empty()) throw std::invalid_argument("mse: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / double(pred.size());
}

struct SynthParams {
    double base_level = 1.2;      // dry-weather level in meters
    double event_rate = 0.02;     // rain events per hour
    double amp_mean = 1.5;        // mean event amplitude in meters
    double rise_tau = 3.0;        // hours
    double decay_tau = 12.0;      // hours
    double noise_std = 0.02;      // sensor noise in meters
    int64_t start_time = 1546300800;  // 2019-01-01T00:00:00
};

inline TimeSeries synthesize(uint64_t seed, size_t hours, const SynthParams& p = {},
                             size_t* event_count = nullptr) {
    if (hours == 0) throw std::invalid_argument("synthesize: hours must be > 0");
    Rng rng(derive_seed(seed, 0x5e71e5));

    std::vector<double> event_time, event_amp;
    if (p.event_rate > 0.0) {
        double t = rng.exponential(p.event_rate);
        while (t < double(hours)) {
            event_time.push_back(t);
            event_amp.push_back(p.amp_mean * rng.exponential(1.0));
            t += rng.exponential(p.event_rate);
        }
    }
    if (event_count) *event_count = event_time.size();

    TimeSeries s;
    s.timestamps.resize(hours);
    s.levels.resize(hours);
    for (size_t h = 0; h < hours; ++h) {
        double level = p.base_level;
        for (size_t e = 0; e < event_time.size(); ++e) {
            const double dt = double(h) - event_time[e];
            if (dt < 0.0) break;
            level += event_amp[e] * (1.0 - std::exp(-dt / p.rise_tau)) *
                     std::exp(-dt / p.decay_tau);
        }
        if (p.noise_std > 0.0) level += p.noise_std * rng.normal();
        s.timestamps[h] = p.start_time + int64_t(h) * kSecondsPerHour;
        s.levels[h] = std::clamp(level, kLevelMin, kLevelMax);
    }
    return s;
}

}  // namespace edgecast
