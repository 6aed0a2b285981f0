#include <CLI11.hpp>

#include "edgecast/cli.hpp"

using namespace edgecast;

int main(int argc, char** argv) {
    CLI::App app{"energy-aware integer forecasters for the XC7S15"};
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* cmd_gen = app.add_subcommand("generate", "synthesize an hourly level series");
    cmd_gen->add_option("--seed", gen.seed, "RNG seed");
    cmd_gen->add_option("--hours", gen.hours, "series length in hours");
    cmd_gen->add_option("--out", gen.out_path, "output CSV path");

    std::string config_path;
    std::string arch_name = "lstm";
    int n = 12, width = 16, bits = 8, trials = -1, jobs = -1;
    uint64_t seed = 0;
    bool seed_given = false, bits_given = false;

    TrainOptions train;
    auto* cmd_tr = app.add_subcommand("train", "fit a forecaster and export artifacts");
    cmd_tr->add_option("--data", train.data_path, "input series CSV")->required();
    cmd_tr->add_option("--arch", arch_name, "network architecture")
        ->check(CLI::IsMember({"lstm", "transformer"}));
    cmd_tr->add_option("--n", n, "input window length");
    cmd_tr->add_option("--width", width, "hidden size / embedding width");
    cmd_tr->add_option("--bits", bits, "quantization bitwidth")
        ->check(CLI::IsMember({4, 6, 8}))
        ->each([&](const std::string&) { bits_given = true; });
    cmd_tr->add_option("--seed", seed, "training seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd_tr->add_option("--mode", train.mode, "fp32 or qat")
        ->check(CLI::IsMember({"fp32", "qat"}));
    cmd_tr->add_option("--config", config_path, "JSON run configuration");
    cmd_tr->add_option("--out", train.out_dir, "output directory");

    SearchOptions search;
    auto* cmd_se = app.add_subcommand("search", "NSGA-II deployment-space search");
    cmd_se->add_option("--data", search.data_path, "input series CSV");
    cmd_se->add_option("--arch", arch_name, "network architecture")
        ->check(CLI::IsMember({"lstm", "transformer"}));
    cmd_se->add_option("--n", n, "input window length");
    cmd_se->add_option("--trials", trials, "evaluation budget");
    cmd_se->add_option("--seed", seed, "search seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd_se->add_option("--jobs", jobs, "parallel trial evaluations");
    cmd_se->add_flag("--surrogate", search.surrogate,
                     "use the analytic evaluator instead of training");
    cmd_se->add_option("--config", config_path, "JSON run configuration");
    cmd_se->add_option("--out", search.out_dir, "output directory");

    ExportOptions exp;
    auto* cmd_ex = app.add_subcommand("export", "quantize a checkpoint into a manifest");
    cmd_ex->add_option("--checkpoint", exp.checkpoint_path, "EOFC checkpoint")->required();
    cmd_ex->add_option("--data", exp.data_path, "calibration series CSV")->required();
    cmd_ex->add_option("--bits", exp.bits, "quantization bitwidth")
        ->check(CLI::IsMember({4, 6, 8}));
    cmd_ex->add_option("--out", exp.out_path, "output manifest path");
    cmd_ex->add_option("--config", config_path, "JSON run configuration");

    VerifyOptions verify;
    auto* cmd_ve = app.add_subcommand("verify", "check a manifest end to end");
    cmd_ve->add_option("--manifest", verify.manifest_path, "EOFM manifest")->required();

    ReportOptions report;
    auto* cmd_re = app.add_subcommand("report", "summarize a search archive");
    cmd_re->add_option("--archive", report.archive_path, "JSONL trial archive")
        ->required();
    cmd_re->add_option("--out", report.out_dir, "output directory");
    cmd_re->add_flag("--audit", report.audit, "re-check the front and census");
    cmd_re->add_option("--front", report.front_path, "front CSV to audit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);

        if (*cmd_gen) return cmd_generate(gen);

        if (*cmd_tr) {
            train.arch = detail::arch_from_name(arch_name);
            train.n = n;
            train.width = width;
            if (bits_given) cfg.train.bitwidth = bits;
            if (seed_given) cfg.train.seed = seed;
            train.cfg = cfg;
            return cmd_train(train);
        }

        if (*cmd_se) {
            search.arch = detail::arch_from_name(arch_name);
            search.n = n;
            if (trials >= 0) cfg.search_trials = trials;
            if (seed_given) cfg.search.seed = seed;
            if (jobs >= 1) cfg.search.jobs = jobs;
            search.cfg = cfg;
            return cmd_search(search);
        }

        if (*cmd_ex) {
            exp.cfg = cfg;
            return cmd_export(exp);
        }

        if (*cmd_ve) return cmd_verify(verify);
        if (*cmd_re) return cmd_report(report);
    } catch (const ConfigError& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
    return 2;
}
