#include "dml/config.hpp"

#include <sstream>

#include "dml/format.hpp"

namespace dml {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text) {
    FlatConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value, got '" + t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        cfg.entries_[key] = trim(t.substr(eq + 1));
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::string& path) {
    try {
        return parse(read_file(path));
    } catch (const IoError& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
}

void FlatConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

void FlatConfig::set_entry(const std::string& entry) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value, got '" + entry + "'");
    }
    set(trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
}

bool FlatConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    consumed_[key] = true;
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    consumed_[key] = true;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return parse_double(it->second);
    } catch (const ParseError&) {
        throw ConfigError(key + ": expected a number, got '" + it->second + "'");
    }
}

std::int64_t FlatConfig::get_int(const std::string& key, std::int64_t fallback) const {
    consumed_[key] = true;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return parse_int(it->second);
    } catch (const ParseError&) {
        throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
    }
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    consumed_[key] = true;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return parse_bool(it->second);
    } catch (const ParseError&) {
        throw ConfigError(key + ": expected true/false, got '" + it->second + "'");
    }
}

std::vector<std::int64_t> FlatConfig::get_int_list(
    const std::string& key, const std::vector<std::int64_t>& fallback) const {
    consumed_[key] = true;
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<std::int64_t> out;
    const std::string& raw = it->second;
    if (trim(raw).empty()) return out;
    std::istringstream ss(raw);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            out.push_back(parse_int(trim(field)));
        } catch (const ParseError&) {
            throw ConfigError(key + ": expected a comma-separated integer list, got '" + raw +
                              "'");
        }
    }
    return out;
}

void FlatConfig::reject_unknown_keys() const {
    for (const auto& [key, value] : entries_) {
        if (!consumed_.count(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

LabeledDataset DatasetSpec::build() const {
    if (kind == "synthetic") {
        return synth_clusters(classes, per_class, dim, center_scale, noise_sigma, seed);
    }
    if (kind == "csv") {
        if (path.empty()) throw ConfigError("dataset.path is required for dataset.kind=csv");
        DelimitedSchema schema;
        schema.label_col = label_col;
        schema.has_header = has_header;
        return load_delimited(path, schema);
    }
    throw ConfigError("dataset.kind: unknown kind '" + kind + "'");
}

namespace {

std::size_t positive_size(const FlatConfig& raw, const std::string& key,
                          std::int64_t fallback) {
    const std::int64_t v = raw.get_int(key, fallback);
    if (v <= 0) throw ConfigError(key + " must be > 0");
    return static_cast<std::size_t>(v);
}

}  // namespace

ResolvedConfig resolve_config(const FlatConfig& raw) {
    ResolvedConfig cfg;

    cfg.train.seed = static_cast<std::uint64_t>(raw.get_int("seed", 1));
    cfg.train.iterations = raw.get_int("iterations", 1000);
    cfg.train.warmup_iterations = raw.get_int("warmup_iterations", 200);
    cfg.train.p = positive_size(raw, "p", 4);
    cfg.train.k = positive_size(raw, "k", 2);
    cfg.train.lr.base = raw.get_double("learning_rate", 0.01);
    cfg.train.lr.decay_iteration = raw.get_int("lr_decay_iteration", 0);
    cfg.train.lr.factor = raw.get_double("lr_decay_factor", 1.0);
    cfg.train.weight_decay = raw.get_double("weight_decay", 5e-4);

    cfg.train.hidden_dims.clear();
    for (const std::int64_t h : raw.get_int_list("net.hidden_dims", {64})) {
        if (h <= 0) throw ConfigError("net.hidden_dims entries must be > 0");
        cfg.train.hidden_dims.push_back(static_cast<std::size_t>(h));
    }
    cfg.train.embedding_dim = positive_size(raw, "net.embedding_dim", 16);

    cfg.train.loss.scheme = parse_scheme(raw.get_string("loss.scheme", "contrastive"));
    cfg.train.loss.contrastive_lambda = raw.get_double("loss.contrastive_lambda", 0.5);
    cfg.train.loss.triplet_eta = raw.get_double("loss.triplet_eta", 0.1);
    cfg.train.loss.ms_beta = raw.get_double("loss.ms_beta", 50.0);
    cfg.train.loss.ms_alpha = raw.get_double("loss.ms_alpha", 2.0);
    cfg.train.loss.ms_lambda = raw.get_double("loss.ms_lambda", 1.0);

    cfg.train.memory_enabled = raw.get_bool("memory.enabled", false);
    cfg.train.memory_ratio = raw.get_double("memory.ratio", 1.0);

    cfg.dataset.kind = raw.get_string("dataset.kind", "synthetic");
    cfg.dataset.classes = positive_size(raw, "dataset.classes", 100);
    cfg.dataset.per_class = positive_size(raw, "dataset.per_class", 20);
    cfg.dataset.dim = positive_size(raw, "dataset.dim", 32);
    cfg.dataset.center_scale = raw.get_double("dataset.center_scale", 1.0);
    cfg.dataset.noise_sigma = raw.get_double("dataset.noise_sigma", 0.1);
    cfg.dataset.seed = static_cast<std::uint64_t>(raw.get_int("dataset.seed", 7));
    cfg.dataset.path = raw.get_string("dataset.path", "");
    cfg.dataset.label_col = static_cast<std::size_t>(raw.get_int("dataset.label_col", 0));
    cfg.dataset.has_header = raw.get_bool("dataset.has_header", false);
    if (cfg.dataset.kind != "synthetic" && cfg.dataset.kind != "csv") {
        throw ConfigError("dataset.kind: unknown kind '" + cfg.dataset.kind + "'");
    }

    cfg.drift.steps = raw.get_int_list("drift.steps", {10, 100, 1000});
    cfg.drift.measure_iters = raw.get_int_list("drift.measure_iters", {});
    cfg.drift.probe_size = positive_size(raw, "drift.probe_size", 256);
    for (const std::int64_t s : cfg.drift.steps) {
        if (s <= 0) throw ConfigError("drift.steps entries must be > 0");
    }

    raw.reject_unknown_keys();
    cfg.train.validate();
    return cfg;
}

namespace {

std::string join_ints(const std::vector<std::int64_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> ResolvedConfig::flatten() const {
    std::map<std::string, std::string> out;
    out["seed"] = std::to_string(train.seed);
    out["iterations"] = std::to_string(train.iterations);
    out["warmup_iterations"] = std::to_string(train.warmup_iterations);
    out["p"] = std::to_string(train.p);
    out["k"] = std::to_string(train.k);
    out["learning_rate"] = format_double(train.lr.base);
    out["lr_decay_iteration"] = std::to_string(train.lr.decay_iteration);
    out["lr_decay_factor"] = format_double(train.lr.factor);
    out["weight_decay"] = format_double(train.weight_decay);
    std::string hidden;
    for (std::size_t i = 0; i < train.hidden_dims.size(); ++i) {
        if (i > 0) hidden.push_back(',');
        hidden += std::to_string(train.hidden_dims[i]);
    }
    out["net.hidden_dims"] = hidden;
    out["net.embedding_dim"] = std::to_string(train.embedding_dim);
    out["loss.scheme"] = scheme_name(train.loss.scheme);
    out["loss.contrastive_lambda"] = format_double(train.loss.contrastive_lambda);
    out["loss.triplet_eta"] = format_double(train.loss.triplet_eta);
    out["loss.ms_beta"] = format_double(train.loss.ms_beta);
    out["loss.ms_alpha"] = format_double(train.loss.ms_alpha);
    out["loss.ms_lambda"] = format_double(train.loss.ms_lambda);
    out["memory.enabled"] = train.memory_enabled ? "true" : "false";
    out["memory.ratio"] = format_double(train.memory_ratio);
    out["dataset.kind"] = dataset.kind;
    out["dataset.classes"] = std::to_string(dataset.classes);
    out["dataset.per_class"] = std::to_string(dataset.per_class);
    out["dataset.dim"] = std::to_string(dataset.dim);
    out["dataset.center_scale"] = format_double(dataset.center_scale);
    out["dataset.noise_sigma"] = format_double(dataset.noise_sigma);
    out["dataset.seed"] = std::to_string(dataset.seed);
    out["dataset.path"] = dataset.path;
    out["dataset.label_col"] = std::to_string(dataset.label_col);
    out["dataset.has_header"] = dataset.has_header ? "true" : "false";
    out["drift.steps"] = join_ints(drift.steps);
    out["drift.measure_iters"] = join_ints(drift.measure_iters);
    out["drift.probe_size"] = std::to_string(drift.probe_size);
    return out;
}

}  // namespace dml
