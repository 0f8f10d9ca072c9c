#pragma once

#include <map>
#include <string>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/trainer.hpp"

namespace dml {

// Flat key=value config ('#' comments, blank lines ignored). Unknown keys
// are rejected by materialize functions so typos surface by name.
class FlatConfig {
public:
    FlatConfig() = default;

    static FlatConfig parse(const std::string& text);       // throws ConfigError
    static FlatConfig load(const std::string& path);        // throws ConfigError

    void set(const std::string& key, const std::string& value);
    // "key=value" form used by --set.
    void set_entry(const std::string& entry);

    bool has(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

    // Typed getters with defaults; record every key they touch.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::int64_t> get_int_list(const std::string& key,
                                           const std::vector<std::int64_t>& fallback) const;

    // Throws ConfigError naming the first key nobody consumed.
    void reject_unknown_keys() const;

private:
    std::map<std::string, std::string> entries_;
    mutable std::map<std::string, bool> consumed_;
};

struct DatasetSpec {
    std::string kind = "synthetic";  // synthetic | csv
    // synthetic
    std::size_t classes = 100;
    std::size_t per_class = 20;
    std::size_t dim = 32;
    double center_scale = 1.0;
    double noise_sigma = 0.1;
    std::uint64_t seed = 7;
    // csv
    std::string path;
    std::size_t label_col = 0;
    bool has_header = false;

    LabeledDataset build() const;
};

struct DriftSpec {
    std::vector<std::int64_t> steps = {10, 100, 1000};
    std::vector<std::int64_t> measure_iters;
    std::size_t probe_size = 256;
};

// Materialized run settings: every key resolved, defaults included.
struct ResolvedConfig {
    TrainConfig train;
    DatasetSpec dataset;
    DriftSpec drift;

    // Flat view with every key present, for manifests and re-runs.
    std::map<std::string, std::string> flatten() const;
};

ResolvedConfig resolve_config(const FlatConfig& raw);  // throws ConfigError

}  // namespace dml
