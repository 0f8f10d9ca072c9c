#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dml/adam.hpp"
#include "dml/dataset.hpp"
#include "dml/memory.hpp"
#include "dml/net.hpp"
#include "dml/pair_loss.hpp"

namespace dml {

// Piecewise-constant: base before decay_iteration, base*factor from it on.
// decay_iteration == 0 disables the step.
struct LrSchedule {
    double base = 0.01;
    std::int64_t decay_iteration = 0;
    double factor = 1.0;

    double at(std::int64_t iteration) const {
        if (decay_iteration > 0 && iteration >= decay_iteration) return base * factor;
        return base;
    }
};

struct TrainConfig {
    std::size_t p = 4;  // classes per batch
    std::size_t k = 2;  // instances per class
    std::int64_t iterations = 1000;
    std::int64_t warmup_iterations = 200;  // in-batch phase before memory starts
    LrSchedule lr;
    double weight_decay = 5e-4;
    std::uint64_t seed = 1;
    std::vector<std::size_t> hidden_dims = {64};
    std::size_t embedding_dim = 16;
    LossHyperparams loss;
    bool memory_enabled = false;
    double memory_ratio = 1.0;

    std::size_t batch_size() const { return p * k; }
    void validate() const;  // throws ConfigError
};

struct MetricsRow {
    std::int64_t iter = 0;
    std::string phase;  // "warmup" | "memory" | "batch"
    double loss = 0.0;
    std::size_t valid_neg_mem = 0;
    std::size_t valid_neg_batch = 0;
    double lr = 0.0;
};

std::string metrics_header();
std::string metrics_row_csv(const MetricsRow& row);

struct TrainHooks {
    // Called with 0 before the first update and with t after the t-th update.
    std::function<void(std::int64_t completed_updates, const EmbeddingNet& net)> after_update;
};

struct TrainResult {
    EmbeddingNet net;
    std::vector<MetricsRow> metrics;
    std::optional<CrossBatchMemory> memory;
};

// Runs the full loop: warm-up on in-batch pairs, then (when enabled) pair
// loss against the cross-batch memory, which is refreshed with the current
// batch before each loss. metrics_out, when given, receives one flushed CSV
// row per iteration.
TrainResult train(const LabeledDataset& data, const TrainConfig& cfg,
                  std::ostream* metrics_out = nullptr, const TrainHooks* hooks = nullptr);

}  // namespace dml
