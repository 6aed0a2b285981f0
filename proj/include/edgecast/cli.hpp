#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgecast/data.hpp"
#include "edgecast/manifest.hpp"
#include "edgecast/search.hpp"
#include "edgecast/train.hpp"

namespace edgecast {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// logging, controlled by the EDGECAST_LOG environment variable

enum class LogLevel { Debug = 0, Info, Warn, Error, Off };

inline LogLevel log_threshold() {
    static const LogLevel level = [] {
        const char* env = std::getenv("EDGECAST_LOG");
        const std::string v = env ? env : "";
        if (v == "debug") return LogLevel::Debug;
        if (v == "info") return LogLevel::Info;
        if (v == "warn" || v.empty()) return LogLevel::Warn;
        if (v == "error") return LogLevel::Error;
        if (v == "off") return LogLevel::Off;
        std::fprintf(stderr, "edgecast: unknown EDGECAST_LOG value '%s', using warn\n",
                     v.c_str());
        return LogLevel::Warn;
    }();
    return level;
}

inline void log_line(LogLevel lv, const std::string& msg) {
    if (lv < log_threshold()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::fprintf(stderr, "edgecast[%s] %s\n", names[int(lv)], msg.c_str());
}

inline void log_debug(const std::string& m) { log_line(LogLevel::Debug, m); }
inline void log_info(const std::string& m) { log_line(LogLevel::Info, m); }
inline void log_warn(const std::string& m) { log_line(LogLevel::Warn, m); }
inline void log_error(const std::string& m) { log_line(LogLevel::Error, m); }

// ---------------------------------------------------------------------------
// run configuration: JSON overrides for the built-in paper-default settings

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    TrainSettings train;
    SplitSpec split;
    SearchSettings search;
    int search_trials = 100;
    int search_max_epochs = 30;
    int search_patience = 8;
    SearchSpace space;
    HardwareBudget budget;
    std::string reference_csv = "data/xc7s15_reference.csv";
};

namespace detail {

inline void check_keys(const ordered_json& j, std::initializer_list<const char*> allowed,
                       const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known)
            throw ConfigError(std::string("unknown config key '") + key + "' in " + where);
    }
}

template <typename T>
void take(const ordered_json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

}  // namespace detail

inline RunConfig parse_run_config(const ordered_json& j) {
    detail::check_keys(
        j, {"train", "split", "search", "space", "budget", "reference_csv"}, "config");
    RunConfig c;
    if (j.contains("train")) {
        const auto& t = j.at("train");
        detail::check_keys(
            t, {"batch_size", "learning_rate", "max_epochs", "patience", "seed", "bitwidth"},
            "config.train");
        detail::take(t, "batch_size", c.train.batch_size);
        detail::take(t, "learning_rate", c.train.learning_rate);
        detail::take(t, "max_epochs", c.train.max_epochs);
        detail::take(t, "patience", c.train.patience);
        detail::take(t, "seed", c.train.seed);
        detail::take(t, "bitwidth", c.train.bitwidth);
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        detail::check_keys(s, {"train_fraction", "test_fraction"}, "config.split");
        detail::take(s, "train_fraction", c.split.train_fraction);
        detail::take(s, "test_fraction", c.split.test_fraction);
    }
    if (j.contains("search")) {
        const auto& s = j.at("search");
        detail::check_keys(s,
                           {"population", "generations", "trials", "jobs", "max_epochs",
                            "patience", "crossover_rate", "sbx_eta", "mutation_eta"},
                           "config.search");
        detail::take(s, "population", c.search.population);
        detail::take(s, "generations", c.search.generations);
        detail::take(s, "trials", c.search_trials);
        detail::take(s, "jobs", c.search.jobs);
        detail::take(s, "max_epochs", c.search_max_epochs);
        detail::take(s, "patience", c.search_patience);
        detail::take(s, "crossover_rate", c.search.crossover_rate);
        detail::take(s, "sbx_eta", c.search.sbx_eta);
        detail::take(s, "mutation_eta", c.search.mutation_eta);
    }
    if (j.contains("space")) {
        const auto& s = j.at("space");
        detail::check_keys(s, {"bits", "batch", "width", "log_lr_lo", "log_lr_hi"},
                           "config.space");
        detail::take(s, "bits", c.space.bit_choices);
        detail::take(s, "batch", c.space.batch_choices);
        detail::take(s, "width", c.space.width_choices);
        detail::take(s, "log_lr_lo", c.space.log_lr_lo);
        detail::take(s, "log_lr_hi", c.space.log_lr_hi);
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        detail::check_keys(b, {"luts", "bram_kbits", "dsp_slices", "clock_hz"},
                           "config.budget");
        detail::take(b, "luts", c.budget.luts);
        detail::take(b, "bram_kbits", c.budget.bram_kbits);
        detail::take(b, "dsp_slices", c.budget.dsp_slices);
        detail::take(b, "clock_hz", c.budget.clock_hz);
    }
    detail::take(j, "reference_csv", c.reference_csv);
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    ordered_json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_run_config(j);
}

// ---------------------------------------------------------------------------

namespace detail {

// shortest round-trip decimal form, the same one the JSON writer uses
inline std::string fmt_double(double v) { return ordered_json(v).dump(); }

inline ArchKind arch_from_name(const std::string& s) {
    if (s == "lstm") return ArchKind::Lstm;
    if (s == "transformer") return ArchKind::Transformer;
    throw ConfigError("unknown architecture '" + s + "'");
}

struct PreparedData {
    SplitDataset split;
    Normalizer normalizer;
};

inline PreparedData prepare_dataset(const std::string& path, int n,
                                    const SplitSpec& spec) {
    const TimeSeries series = load_csv(path);
    const WindowedDataset windows = make_windows(series, n);
    PreparedData d;
    d.split = chronological_split(windows, series.size(), spec);
    d.normalizer = fit_normalizer(d.split.train);
    d.split.train = normalize_dataset(d.split.train, d.normalizer);
    d.split.val = normalize_dataset(d.split.val, d.normalizer);
    d.split.test = normalize_dataset(d.split.test, d.normalizer);
    return d;
}

inline ordered_json trial_to_json(const Trial& t) {
    ordered_json j;
    j["schema"] = 1;
    j["trial"] = t.id;
    j["arch"] = arch_name(t.arch);
    j["n"] = t.input_len;
    j["bits"] = t.bitwidth;
    j["batch"] = t.batch_size;
    j["width"] = t.width;
    j["lr"] = t.learning_rate;
    j["seed"] = t.seed;
    j["status"] = t.complete() ? "complete" : "failed";
    if (t.complete()) {
        j["val_mse"] = t.val_mse;
        j["energy_mj"] = t.energy_mj;
        j["feasible"] = t.feasible;
        j["total_violation"] = t.total_violation;
        j["violations"] = t.violations;
        j["luts_pct"] = t.cost.resources.luts_pct;
        j["bram_pct"] = t.cost.resources.bram_pct;
        j["dsp_pct"] = t.cost.resources.dsp_pct;
        j["power_mw"] = t.cost.cost.power_mw;
        j["latency_ms"] = t.cost.cost.latency_ms;
    } else {
        j["val_mse"] = nullptr;
        j["energy_mj"] = nullptr;
        j["feasible"] = false;
        j["total_violation"] = nullptr;
        j["violations"] = ordered_json::array();
        j["luts_pct"] = nullptr;
        j["bram_pct"] = nullptr;
        j["dsp_pct"] = nullptr;
        j["power_mw"] = nullptr;
        j["latency_ms"] = nullptr;
    }
    return j;
}

inline Trial trial_from_json(const ordered_json& j) {
    Trial t;
    t.id = j.at("trial").get<int>();
    t.arch = arch_from_name(j.at("arch").get<std::string>());
    t.input_len = j.at("n").get<int>();
    t.bitwidth = j.at("bits").get<int>();
    t.batch_size = j.at("batch").get<int>();
    t.width = j.at("width").get<int>();
    t.learning_rate = j.at("lr").get<double>();
    t.seed = j.at("seed").get<uint64_t>();
    if (j.at("status").get<std::string>() == "complete") {
        t.status = TrialStatus::Complete;
        t.val_mse = j.at("val_mse").get<double>();
        t.energy_mj = j.at("energy_mj").get<double>();
        t.feasible = j.at("feasible").get<bool>();
        t.total_violation = j.at("total_violation").get<double>();
        t.violations = j.at("violations").get<std::vector<std::string>>();
        t.cost.resources.luts_pct = j.at("luts_pct").get<double>();
        t.cost.resources.bram_pct = j.at("bram_pct").get<double>();
        t.cost.resources.dsp_pct = j.at("dsp_pct").get<double>();
        t.cost.cost.power_mw = j.at("power_mw").get<double>();
        t.cost.cost.latency_ms = j.at("latency_ms").get<double>();
        t.cost.cost.energy_mj = t.energy_mj;
        t.cost.feasibility.feasible = t.feasible;
        t.cost.feasibility.total_violation = t.total_violation;
        t.cost.feasibility.violations = t.violations;
    } else {
        t.status = TrialStatus::Failed;
    }
    return t;
}

inline std::string front_csv_header() {
    return "trial_id,b,bs,lr,width,val_mse,energy_mj,luts_pct,bram_pct,dsp_pct,"
           "power_mw,latency_ms";
}

inline std::string front_csv_row(const Trial& t) {
    std::ostringstream row;
    row << t.id << ',' << t.bitwidth << ',' << t.batch_size << ','
        << fmt_double(t.learning_rate) << ',' << t.width << ',' << fmt_double(t.val_mse)
        << ',' << fmt_double(t.energy_mj) << ',' << fmt_double(t.cost.resources.luts_pct)
        << ',' << fmt_double(t.cost.resources.bram_pct) << ','
        << fmt_double(t.cost.resources.dsp_pct) << ','
        << fmt_double(t.cost.cost.power_mw) << ','
        << fmt_double(t.cost.cost.latency_ms);
    return row.str();
}

inline ordered_json trial_summary_row(const Trial& t) {
    ordered_json row;
    row["trial"] = t.id;
    row["arch"] = arch_name(t.arch);
    row["n"] = t.input_len;
    row["bits"] = t.bitwidth;
    row["width"] = t.width;
    row["batch"] = t.batch_size;
    row["lr"] = t.learning_rate;
    row["val_mse"] = t.val_mse;
    row["power_mw"] = t.cost.cost.power_mw;
    row["latency_ms"] = t.cost.cost.latency_ms;
    row["energy_mj"] = t.energy_mj;
    row["luts_pct"] = t.cost.resources.luts_pct;
    row["bram_pct"] = t.cost.resources.bram_pct;
    row["dsp_pct"] = t.cost.resources.dsp_pct;
    return row;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed on " + path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate: synthetic storm-water level series

struct GenerateOptions {
    uint64_t seed = 7;
    int64_t hours = 26280;
    std::string out_path = "series.csv";
};

inline int cmd_generate(const GenerateOptions& opt) {
    try {
        if (opt.hours < 1) throw std::invalid_argument("hours must be >= 1");
        const TimeSeries s = synthesize(opt.seed, size_t(opt.hours));
        write_csv(s, opt.out_path);
        log_info("wrote " + std::to_string(s.size()) + " rows to " + opt.out_path);
        std::printf("generated %zu rows -> %s\n", s.size(), opt.out_path.c_str());
        return 0;
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
}

// ---------------------------------------------------------------------------
// train: fp32 baseline or quantization-aware fine-tune, checkpoint + metrics

struct TrainOptions {
    std::string data_path;
    std::string out_dir = ".";
    ArchKind arch = ArchKind::Lstm;
    int n = 12;
    int width = 16;
    std::string mode = "qat";
    RunConfig cfg;
};

namespace detail {

template <class A>
int train_impl(const TrainOptions& opt) {
    const PreparedData data = prepare_dataset(opt.data_path, opt.n, opt.cfg.split);
    typename A::Model model = A::make(opt.n, opt.width, opt.cfg.train.seed);

    ordered_json metrics;
    metrics["schema"] = 1;
    metrics["arch"] = arch_name(opt.arch);
    metrics["n"] = opt.n;
    metrics["width"] = opt.width;
    metrics["mode"] = opt.mode;
    metrics["seed"] = opt.cfg.train.seed;

    const TrainResult fp32 =
        fit_fp32<A>(model, data.split.train, data.split.val, opt.cfg.train);
    int epochs = fp32.epochs_run;
    double val_mse = fp32.best_val;
    metrics["test_mse_fp32"] = eval_fp32<A>(model, data.split.test);

    std::filesystem::create_directories(opt.out_dir);
    const std::string stem = opt.out_dir + "/" + arch_name(opt.arch);

    if (opt.mode == "qat") {
        metrics["bits"] = opt.cfg.train.bitwidth;
        const FitOutcome<A> out =
            fit_quantized<A>(model, data.split.train, data.split.val, opt.cfg.train);
        epochs += out.history.epochs_run;
        val_mse = out.history.best_val;
        metrics["test_mse_quantized"] = eval_compiled<A>(out.net, data.split.test);
        write_binary_file(stem + ".eofm", serialize_manifest(out.net));
        log_info("manifest written to " + stem + ".eofm");
    }
    metrics["val_mse"] = val_mse;
    metrics["epochs"] = epochs;

    write_binary_file(stem + ".eofc", save_checkpoint(model));
    write_text_file(stem + "_metrics.json", metrics.dump(2) + "\n");
    std::printf("val_mse %s epochs %d -> %s\n", fmt_double(val_mse).c_str(), epochs,
                (stem + "_metrics.json").c_str());
    return 0;
}

}  // namespace detail

inline int cmd_train(const TrainOptions& opt) {
    try {
        if (opt.mode != "fp32" && opt.mode != "qat")
            throw ConfigError("mode must be fp32 or qat");
        opt.cfg.train.validate();
        return opt.arch == ArchKind::Lstm ? detail::train_impl<LstmArch>(opt)
                                          : detail::train_impl<TransformerArch>(opt);
    } catch (const ConfigError& e) {
        log_error(e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        log_error(e.what());
        return std::string(e.what()).find("diverged") != std::string::npos ? 1 : 2;
    }
}

// ---------------------------------------------------------------------------
// search: NSGA-II over the deployment space, JSONL archive + front CSV

struct SearchOptions {
    std::string data_path;
    std::string out_dir = ".";
    ArchKind arch = ArchKind::Lstm;
    int n = 12;
    bool surrogate = false;
    RunConfig cfg;
};

namespace detail {

template <class A>
EvalResult real_eval(const Trial& t, const SplitDataset& data, const RunConfig& cfg,
                     const CostModelParams& params) {
    EvalResult r;
    r.cost = estimate_cost(NetConfig{t.arch, t.input_len, t.width}, t.bitwidth, params,
                           cfg.budget);
    typename A::Model m = A::make(t.input_len, t.width, t.seed);
    TrainSettings ts = cfg.train;
    ts.batch_size = t.batch_size;
    ts.learning_rate = t.learning_rate;
    ts.bitwidth = t.bitwidth;
    ts.seed = t.seed;
    ts.max_epochs = cfg.search_max_epochs;
    ts.patience = cfg.search_patience;
    const FitOutcome<A> out = fit_quantized<A>(m, data.train, data.val, ts);
    r.val_mse = out.history.best_val;
    return r;
}

template <class A>
std::string manifest_for_trial(const Trial& t, const SplitDataset& data,
                               const RunConfig& cfg) {
    typename A::Model m = A::make(t.input_len, t.width, t.seed);
    TrainSettings ts = cfg.train;
    ts.batch_size = t.batch_size;
    ts.learning_rate = t.learning_rate;
    ts.bitwidth = t.bitwidth;
    ts.seed = t.seed;
    ts.max_epochs = cfg.search_max_epochs;
    ts.patience = cfg.search_patience;
    const FitOutcome<A> out = fit_quantized<A>(m, data.train, data.val, ts);
    return serialize_manifest(out.net);
}

}  // namespace detail

inline int cmd_search(const SearchOptions& opt) {
    try {
        SearchSpace space = opt.cfg.space;
        space.arch = opt.arch;
        space.input_len = opt.n;
        const CostModelParams params =
            calibrate(load_reference_table(opt.cfg.reference_csv));

        SplitDataset data;
        if (!opt.surrogate) {
            if (opt.data_path.empty())
                throw ConfigError("search without --surrogate needs --data");
            detail::PreparedData prepared =
                detail::prepare_dataset(opt.data_path, opt.n, opt.cfg.split);
            data = std::move(prepared.split);
        }

        Evaluator evaluate;
        if (opt.surrogate) {
            evaluate = SurrogateEvaluator{params, opt.cfg.budget};
        } else {
            const RunConfig& cfg = opt.cfg;
            evaluate = [&data, &cfg, &params](const Trial& t) {
                return t.arch == ArchKind::Lstm
                           ? detail::real_eval<LstmArch>(t, data, cfg, params)
                           : detail::real_eval<TransformerArch>(t, data, cfg, params);
            };
        }

        log_info("searching " + arch_name(opt.arch) + " n=" +
                 std::to_string(opt.n) + " trials=" + std::to_string(opt.cfg.search_trials));
        const SearchResult res =
            nsga2_run(space, evaluate, opt.cfg.search_trials, opt.cfg.search);

        std::filesystem::create_directories(opt.out_dir);
        std::string archive;
        for (const Trial& t : res.archive)
            archive += detail::trial_to_json(t).dump() + "\n";
        detail::write_text_file(opt.out_dir + "/archive.jsonl", archive);

        std::string front_csv = detail::front_csv_header() + "\n";
        for (size_t i : res.front) front_csv += detail::front_csv_row(res.archive[i]) + "\n";
        detail::write_text_file(opt.out_dir + "/front.csv", front_csv);

        const Census census = deployability_census(res.archive);
        ordered_json summary;
        summary["schema"] = 1;
        summary["arch"] = arch_name(opt.arch);
        summary["n"] = opt.n;
        summary["trials"] = int(res.archive.size());
        summary["census"] = {{"feasible", census.feasible},
                             {"infeasible", census.infeasible},
                             {"failed", census.failed}};
        summary["front_size"] = int(res.front.size());
        summary["selected"] =
            res.front.empty() ? ordered_json(nullptr)
                              : detail::trial_summary_row(res.archive[res.front[0]]);
        detail::write_text_file(opt.out_dir + "/summary.json", summary.dump(2) + "\n");

        if (!opt.surrogate && !res.front.empty()) {
            const Trial& best = res.archive[res.front[0]];
            const std::string manifest =
                best.arch == ArchKind::Lstm
                    ? detail::manifest_for_trial<LstmArch>(best, data, opt.cfg)
                    : detail::manifest_for_trial<TransformerArch>(best, data, opt.cfg);
            write_binary_file(opt.out_dir + "/best.eofm", manifest);
        }

        std::printf("%d trials: %d feasible, %d infeasible, %d failed; front size %zu\n",
                    int(res.archive.size()), census.feasible, census.infeasible,
                    census.failed, res.front.size());
        return 0;
    } catch (const ConfigError& e) {
        log_error(e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
}

// ---------------------------------------------------------------------------
// export: post-training quantization of a checkpoint into a manifest

struct ExportOptions {
    std::string checkpoint_path;
    std::string data_path;
    std::string out_path = "model.eofm";
    int bits = 8;
    RunConfig cfg;
};

namespace detail {

template <class A>
std::string export_impl(typename A::Model& model, const std::string& data_path,
                        const SplitSpec& split, int bits) {
    const PreparedData data = prepare_dataset(data_path, model.cfg.input_len, split);
    typename A::Observers obs;
    const size_t ncal = std::min<size_t>(data.split.train.size(), 256);
    const size_t stride = std::max<size_t>(1, data.split.train.size() / ncal);
    for (size_t k = 0; k < ncal; ++k) {
        Tape t(&model.store);
        A::build_fp32(t, model, data.split.train.inputs[k * stride], &obs);
    }
    obs.commit();
    typename A::Edges e = A::make_edges(model, obs, bits);
    return serialize_manifest(A::compile(model, e));
}

}  // namespace detail

inline int cmd_export(const ExportOptions& opt) {
    try {
        const std::string bytes = read_binary_file(opt.checkpoint_path);
        const CheckpointHeader head = checkpoint_header(bytes);
        std::string manifest;
        if (head.arch == ArchKind::Lstm) {
            LstmModel m = load_lstm_checkpoint(bytes);
            manifest = detail::export_impl<LstmArch>(m, opt.data_path, opt.cfg.split,
                                                     opt.bits);
        } else {
            TransformerModel m = load_transformer_checkpoint(bytes);
            manifest = detail::export_impl<TransformerArch>(m, opt.data_path,
                                                            opt.cfg.split, opt.bits);
        }
        write_binary_file(opt.out_path, manifest);
        std::printf("manifest -> %s (%zu bytes)\n", opt.out_path.c_str(),
                    manifest.size());
        return 0;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
}

// ---------------------------------------------------------------------------
// verify: integrity, multiplier re-derivation and golden replay

struct VerifyOptions {
    std::string manifest_path;
};

inline int cmd_verify(const VerifyOptions& opt) {
    std::string bytes;
    try {
        bytes = read_binary_file(opt.manifest_path);
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
    try {
        const LoadedManifest m = verify_manifest(bytes);
        std::printf("OK %s %s n=%d width=%d bits=%d goldens=%zu\n",
                    opt.manifest_path.c_str(), arch_name(m.arch).c_str(),
                    m.cfg().input_len, m.cfg().width, m.bitwidth(), m.goldens.size());
        return 0;
    } catch (const std::exception& e) {
        log_error(std::string("verification failed: ") + e.what());
        std::printf("FAIL %s: %s\n", opt.manifest_path.c_str(), e.what());
        return 1;
    }
}

// ---------------------------------------------------------------------------
// report: scatter data, front highlights, summary, optional audit

struct ReportOptions {
    std::string archive_path;
    std::string out_dir = ".";
    bool audit = false;
    std::string front_path;  // defaults to front.csv next to the archive
};

inline int cmd_report(const ReportOptions& opt) {
    try {
        std::ifstream f(opt.archive_path);
        if (!f) throw std::runtime_error("cannot open archive: " + opt.archive_path);
        std::vector<Trial> trials;
        std::string line;
        size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                trials.push_back(detail::trial_from_json(ordered_json::parse(line)));
            } catch (const nlohmann::json::exception& e) {
                throw std::runtime_error(opt.archive_path + ":" +
                                         std::to_string(lineno) + ": " + e.what());
            }
        }

        std::filesystem::create_directories(opt.out_dir);
        const auto front = pareto_extract(trials);
        std::vector<bool> on_front(trials.size(), false);
        for (size_t i : front) on_front[i] = true;

        std::string scatter = "trial_id,val_mse,energy_mj,front\n";
        for (size_t i = 0; i < trials.size(); ++i) {
            const Trial& t = trials[i];
            if (!t.complete()) continue;
            scatter += std::to_string(t.id) + "," + detail::fmt_double(t.val_mse) + "," +
                       detail::fmt_double(t.energy_mj) + "," + (on_front[i] ? "1" : "0") +
                       "\n";
        }
        detail::write_text_file(opt.out_dir + "/scatter.csv", scatter);

        const Census census = deployability_census(trials);
        ordered_json summary;
        summary["schema"] = 1;
        summary["trials"] = int(trials.size());
        summary["census"] = {{"feasible", census.feasible},
                             {"infeasible", census.infeasible},
                             {"failed", census.failed}};
        summary["front_size"] = int(front.size());
        summary["selected"] = front.empty()
                                  ? ordered_json(nullptr)
                                  : detail::trial_summary_row(trials[front[0]]);
        detail::write_text_file(opt.out_dir + "/report.json", summary.dump(2) + "\n");

        if (trials.empty()) log_warn("archive is empty, outputs contain headers only");

        if (opt.audit) {
            std::string front_path = opt.front_path;
            if (front_path.empty()) {
                const auto parent =
                    std::filesystem::path(opt.archive_path).parent_path();
                front_path = (parent.empty() ? std::filesystem::path(".") : parent) /
                             "front.csv";
            }
            std::ifstream fc(front_path);
            if (!fc) throw std::runtime_error("cannot open front csv: " + front_path);
            std::set<int> claimed;
            std::string row;
            std::getline(fc, row);  // header
            while (std::getline(fc, row)) {
                if (row.empty()) continue;
                claimed.insert(std::stoi(row.substr(0, row.find(','))));
            }
            std::set<int> recomputed;
            for (size_t i : front) recomputed.insert(trials[i].id);
            if (claimed != recomputed) {
                std::printf("AUDIT FAIL: front csv claims %zu rows, oracle finds %zu\n",
                            claimed.size(), recomputed.size());
                return 1;
            }
            std::printf("AUDIT OK: %zu front rows non-dominated; census %d/%d/%d "
                        "feasible/infeasible/failed\n",
                        recomputed.size(), census.feasible, census.infeasible,
                        census.failed);
        } else {
            std::printf("%d trials, front size %zu -> %s\n", int(trials.size()),
                        front.size(), (opt.out_dir + "/report.json").c_str());
        }
        return 0;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
}

}  // namespace edgecast
