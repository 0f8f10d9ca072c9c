#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dml/commands.hpp"
#include "dml/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::size_t> parse_ks(const std::string& raw) {
    std::vector<std::size_t> ks;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        const auto comma = raw.find(',', pos);
        const std::string field = raw.substr(pos, comma == std::string::npos ? std::string::npos
                                                                             : comma - pos);
        if (field.empty()) throw dml::ConfigError("--ks: empty entry in '" + raw + "'");
        std::size_t idx = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(field, &idx);
        } catch (const std::exception&) {
            throw dml::ConfigError("--ks: bad entry '" + field + "'");
        }
        if (idx != field.size() || v == 0) {
            throw dml::ConfigError("--ks: bad entry '" + field + "'");
        }
        ks.push_back(static_cast<std::size_t>(v));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return ks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metric-embedding trainer with a cross-batch pair memory"};
    app.require_subcommand(1);

    dml::TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train an embedding model");
    train_cmd->add_option("--config", train_args.config_path, "Flat config file or manifest.json");
    train_cmd->add_option("--set", train_args.overrides, "Override key=value; repeatable");
    train_cmd->add_option("--out", train_args.out_dir, "Output directory");
    train_cmd->add_option("--seed", train_args.seed, "Override the training seed");

    dml::EvalArgs eval_args;
    std::string ks_raw = "1,2,4,8";
    auto* eval_cmd = app.add_subcommand("eval", "Recall@k retrieval evaluation");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint_path, "Model checkpoint")
        ->required();
    eval_cmd->add_option("--data", eval_args.data_path, "Delimited dataset file")->required();
    eval_cmd->add_option("--label-col", eval_args.label_col, "Label column index");
    eval_cmd->add_flag("--header", eval_args.has_header, "Skip a header line");
    eval_cmd->add_option("--ks", ks_raw, "Comma-separated k values");
    eval_cmd->add_option("--out", eval_args.out_dir, "Output directory");

    dml::DriftArgs drift_args;
    auto* drift_cmd = app.add_subcommand("drift", "Embedding drift experiment");
    drift_cmd->add_option("--config", drift_args.config_path, "Flat config file or manifest.json");
    drift_cmd->add_option("--set", drift_args.overrides, "Override key=value; repeatable");
    drift_cmd->add_option("--out", drift_args.out_dir, "Output directory");
    drift_cmd->add_option("--seed", drift_args.seed, "Override the training seed");

    dml::StatsArgs stats_args;
    auto* stats_cmd = app.add_subcommand("stats", "Mining statistics from a run's metrics");
    stats_cmd->add_option("--run", stats_args.run_dir, "Run directory with metrics.csv")
        ->required();
    stats_cmd->add_option("--window", stats_args.window, "Trailing mean window");
    stats_cmd->add_option("--out", stats_args.out_dir, "Output directory (default: run dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        std::string out_dir;
        if (*train_cmd) {
            out_dir = dml::run_train(train_args);
        } else if (*eval_cmd) {
            eval_args.ks = parse_ks(ks_raw);
            out_dir = dml::run_eval(eval_args);
        } else if (*drift_cmd) {
            out_dir = dml::run_drift(drift_args);
        } else if (*stats_cmd) {
            out_dir = dml::run_stats(stats_args);
        }
        std::cout << out_dir << "\n";
        return kExitOk;
    } catch (const dml::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
