#pragma once

#include <string>
#include <vector>

#include "dml/config.hpp"

namespace dml {

// Output root defaults to $DML_OUT_ROOT or ./runs when --out is not given.
std::string default_out_dir(const std::string& command);

struct TrainArgs {
    std::string config_path;               // flat config or a manifest.json
    std::vector<std::string> overrides;    // key=value
    std::string out_dir;
    std::int64_t seed = -1;                // <0 keeps the config's seed
};

struct EvalArgs {
    std::string checkpoint_path;
    std::string data_path;
    std::size_t label_col = 0;
    bool has_header = false;
    std::vector<std::size_t> ks = {1, 2, 4, 8};
    std::string out_dir;
};

struct DriftArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::int64_t seed = -1;
};

struct StatsArgs {
    std::string run_dir;  // directory containing metrics.csv
    std::size_t window = 50;
    std::string out_dir;  // defaults to run_dir
};

// Each writes a manifest before doing work, then its artifacts, and returns
// the output directory. Errors surface as exceptions; main maps ConfigError
// to exit 2 and everything else to exit 3.
std::string run_train(const TrainArgs& args);
std::string run_eval(const EvalArgs& args);
std::string run_drift(const DriftArgs& args);
std::string run_stats(const StatsArgs& args);

}  // namespace dml
