// Command-line front end for the finance-graph clustering pipeline.
//
//   fingraph synth      --config cfg.json [--seed N] [--out-dir D]
//   fingraph build      --config cfg.json ...
//   fingraph cv         --config cfg.json ...
//   fingraph train-eval --config cfg.json [--mode full|edges_only|features_only]
//
// Flags override the config file. Exit codes: 0 success, 1 numeric or
// validation failure, 2 I/O or config error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fingraph/error.hpp"
#include "fingraph/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--seed", opts.seed, "override the run seed");
    cmd->add_option("--out-dir", opts.out_dir, "override the output directory");
}

int load_and_run(const CliOptions& opts, int (*runner)(const fingraph::RunConfig&)) {
    try {
        fingraph::RunConfig cfg;
        if (!opts.config_path.empty()) cfg = fingraph::load_run_config(opts.config_path);
        if (opts.seed) cfg.seed = *opts.seed;
        if (opts.mode) cfg.mode = fingraph::parse_mode(*opts.mode);
        if (opts.out_dir) cfg.out_dir = *opts.out_dir;
        return runner(cfg);
    } catch (const fingraph::FileError& e) {
        std::cerr << "fingraph: " << e.what() << "\n";
        return 2;
    } catch (const fingraph::ConfigError& e) {
        std::cerr << "fingraph: " << e.what() << "\n";
        return 2;
    } catch (const fingraph::Error& e) {
        std::cerr << "fingraph: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"News co-occurrence + close-price graph auto-encoder clustering pipeline"};
    app.require_subcommand(1);

    CliOptions synth_opts, build_opts, cv_opts, eval_opts;

    CLI::App* synth = app.add_subcommand("synth", "generate a planted-partition dataset");
    add_common_flags(synth, synth_opts);

    CLI::App* build = app.add_subcommand("build", "build graph and feature artifacts");
    add_common_flags(build, build_opts);

    CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validation over the config grid");
    add_common_flags(cv, cv_opts);

    CLI::App* train_eval =
        app.add_subcommand("train-eval", "final training, clustering and evaluation");
    add_common_flags(train_eval, eval_opts);
    train_eval->add_option("--mode", eval_opts.mode,
                           "ablation mode: full, edges_only or features_only");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) return load_and_run(synth_opts, fingraph::run_synth);
    if (build->parsed()) return load_and_run(build_opts, fingraph::run_build);
    if (cv->parsed()) return load_and_run(cv_opts, fingraph::run_cv);
    return load_and_run(eval_opts, fingraph::run_train_eval);
}
