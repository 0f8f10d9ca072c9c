#include "dml/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dml/drift.hpp"
#include "dml/eval.hpp"
#include "dml/format.hpp"
#include "dml/serialize.hpp"

namespace dml {

namespace fs = std::filesystem;

std::string default_out_dir(const std::string& command) {
    const char* root = std::getenv("DML_OUT_ROOT");
    const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    return (base / command).string();
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output dir " + dir + ": " + ec.message());
}

// --config accepts either a flat key=value file or a previously written
// manifest.json; a manifest re-run reproduces the original artifacts.
FlatConfig load_config_any(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json manifest;
        try {
            manifest = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": bad manifest JSON: " + e.what());
        }
        if (!manifest.contains("config") || !manifest["config"].is_object()) {
            throw ConfigError(path + ": manifest has no config object");
        }
        FlatConfig cfg;
        for (const auto& [key, value] : manifest["config"].items()) {
            if (!value.is_string()) {
                throw ConfigError(path + ": manifest config values must be strings");
            }
            cfg.set(key, value.get<std::string>());
        }
        return cfg;
    }
    return FlatConfig::parse(text);
}

ResolvedConfig resolve_from_args(const std::string& config_path,
                                 const std::vector<std::string>& overrides,
                                 std::int64_t seed_override) {
    FlatConfig raw = config_path.empty() ? FlatConfig() : load_config_any(config_path);
    for (const auto& entry : overrides) raw.set_entry(entry);
    if (seed_override >= 0) raw.set("seed", std::to_string(seed_override));
    return resolve_config(raw);
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const ResolvedConfig& cfg,
                    const std::map<std::string, std::string>& artifacts) {
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["config"] = cfg.flatten();
    manifest["artifacts"] = artifacts;
    atomic_write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace

std::string run_train(const TrainArgs& args) {
    const ResolvedConfig cfg = resolve_from_args(args.config_path, args.overrides, args.seed);
    const std::string out_dir = args.out_dir.empty() ? default_out_dir("train") : args.out_dir;
    ensure_dir(out_dir);

    std::map<std::string, std::string> artifacts = {
        {"metrics", "metrics.csv"},
        {"checkpoint", "checkpoint.bin"},
    };
    if (cfg.train.memory_enabled) artifacts["memory"] = "memory.bin";
    write_manifest(out_dir, "train", cfg, artifacts);

    const LabeledDataset data = cfg.dataset.build();

    // Streamed and flushed per iteration so an interrupted run still leaves
    // an analyzable prefix; everything else is written atomically.
    const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics) throw IoError("cannot write " + metrics_path);

    const TrainResult result = train(data, cfg.train, &metrics);

    save_checkpoint((fs::path(out_dir) / "checkpoint.bin").string(), result.net);
    if (result.memory) {
        SnapshotRows rows;
        rows.embeddings = result.memory->embedding_matrix();
        rows.ids = result.memory->stored_ids();
        rows.labels = result.memory->stored_labels();
        save_snapshot((fs::path(out_dir) / "memory.bin").string(), rows);
    }
    return out_dir;
}

std::string run_eval(const EvalArgs& args) {
    if (args.checkpoint_path.empty()) throw ConfigError("eval: --checkpoint is required");
    if (args.data_path.empty()) throw ConfigError("eval: --data is required");
    if (args.ks.empty()) throw ConfigError("eval: --ks must not be empty");

    const EmbeddingNet net = load_checkpoint(args.checkpoint_path);
    DelimitedSchema schema;
    schema.label_col = args.label_col;
    schema.has_header = args.has_header;
    const LabeledDataset data = load_delimited(args.data_path, schema);
    if (data.dim() != net.input_dim()) {
        throw ConfigError("eval: dataset dim " + std::to_string(data.dim()) +
                          " does not match checkpoint input dim " +
                          std::to_string(net.input_dim()));
    }

    const std::string out_dir = args.out_dir.empty() ? default_out_dir("eval") : args.out_dir;
    ensure_dir(out_dir);

    const DenseMatrix embeddings = net.forward(data.features).first;
    const RetrievalReport report = recall_at_k(embeddings, data.labels, embeddings, data.labels,
                                               args.ks, /*self_exclude=*/true);
    atomic_write_file((fs::path(out_dir) / "recall.csv").string(), recall_csv(report));
    atomic_write_file((fs::path(out_dir) / "recall.json").string(), recall_json(report));
    return out_dir;
}

std::string run_drift(const DriftArgs& args) {
    const ResolvedConfig cfg = resolve_from_args(args.config_path, args.overrides, args.seed);
    if (cfg.drift.measure_iters.empty()) {
        throw ConfigError("drift.measure_iters is required for the drift command");
    }
    const std::string out_dir = args.out_dir.empty() ? default_out_dir("drift") : args.out_dir;
    ensure_dir(out_dir);
    write_manifest(out_dir, "drift", cfg,
                   {{"drift", "drift.csv"}, {"stale_gradient", "stale_gradient.csv"}});

    const LabeledDataset data = cfg.dataset.build();

    DriftExperimentSpec spec;
    spec.steps = cfg.drift.steps;
    spec.measure_iters = cfg.drift.measure_iters;
    spec.probe_size = std::min(cfg.drift.probe_size, data.size());
    spec.probe_seed = cfg.train.seed ^ 0xa24baed4963ee407ULL;
    const std::vector<DriftRecord> records = run_drift_experiment(data, cfg.train, spec);
    atomic_write_file((fs::path(out_dir) / "drift.csv").string(), drift_csv(records));

    // Stale-vs-fresh gradient comparison on a short warm model: random unit
    // targets perturbed at shrinking scales.
    TrainConfig warm_cfg = cfg.train;
    warm_cfg.iterations = std::min<std::int64_t>(cfg.train.iterations, 200);
    warm_cfg.warmup_iterations = 0;
    warm_cfg.memory_enabled = false;
    const TrainResult warm = train(data, warm_cfg);

    std::mt19937_64 rng(cfg.train.seed ^ 0x5851f42d4c957f2dULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_row(0, data.size() - 1);
    const std::size_t dim = warm.net.output_dim();
    std::vector<StaleGradientRecord> records_sg;
    for (int trial = 0; trial < 64; ++trial) {
        DenseMatrix anchor(1, data.dim());
        const std::size_t r = pick_row(rng);
        for (std::size_t c = 0; c < data.dim(); ++c) anchor(0, c) = data.features(r, c);
        std::vector<double> fresh(dim);
        for (double& x : fresh) x = gauss(rng);
        fresh = l2_normalize(fresh);
        std::vector<double> stale(dim);
        const double scale = std::pow(10.0, -1.0 - (trial % 4));
        for (std::size_t i = 0; i < dim; ++i) stale[i] = fresh[i] + scale * gauss(rng);
        const auto rec = stale_pair_gradient_error(warm.net, anchor, fresh, stale);
        if (rec) records_sg.push_back(*rec);
    }
    atomic_write_file((fs::path(out_dir) / "stale_gradient.csv").string(),
                      stale_gradient_csv(records_sg));
    return out_dir;
}

std::string run_stats(const StatsArgs& args) {
    if (args.run_dir.empty()) throw ConfigError("stats: --run is required");
    const std::string metrics_path = (fs::path(args.run_dir) / "metrics.csv").string();
    std::string text;
    try {
        text = read_file(metrics_path);
    } catch (const IoError& e) {
        throw ConfigError(std::string("stats: ") + e.what());
    }

    std::vector<MiningSample> samples;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "iter,phase,loss,valid_neg_mem,valid_neg_batch,lr") {
                throw ParseError(metrics_path + ": unexpected header '" + line + "'");
            }
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6) {
            throw ParseError(metrics_path + " line " + std::to_string(line_no) +
                             ": expected 6 columns");
        }
        MiningSample s;
        s.iter = parse_int(fields[0]);
        s.valid_mem = static_cast<std::size_t>(parse_int(fields[3]));
        s.valid_batch = static_cast<std::size_t>(parse_int(fields[4]));
        samples.push_back(s);
    }
    if (samples.empty()) throw ParseError(metrics_path + ": no data rows");

    bool any_mem = false;
    for (const auto& s : samples) any_mem = any_mem || s.valid_mem > 0;
    if (!any_mem) {
        std::cerr << "notice: no memory-phase rows in " << metrics_path
                  << "; valid_mem column is all zeros (baseline run)\n";
    }

    const std::string out_dir = args.out_dir.empty() ? args.run_dir : args.out_dir;
    ensure_dir(out_dir);
    const std::vector<MiningRow> rows = mining_report(samples, args.window);
    atomic_write_file((fs::path(out_dir) / "mining.csv").string(), mining_csv(rows));
    return out_dir;
}

}  // namespace dml
