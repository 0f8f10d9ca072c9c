#include "dml/trainer.hpp"

#include <cmath>
#include <iostream>
#include <random>

#include "dml/format.hpp"
#include "dml/sampler.hpp"

namespace dml {

void TrainConfig::validate() const {
    if (p == 0 || k < 2) throw ConfigError("need p >= 1 and k >= 2");
    if (batch_size() < 2) throw ConfigError("batch size p*k must be >= 2");
    if (iterations <= 0) throw ConfigError("iterations must be > 0");
    if (warmup_iterations < 0 || warmup_iterations >= iterations) {
        throw ConfigError("warmup_iterations must be in [0, iterations)");
    }
    if (!(lr.base >= 0.0) || !std::isfinite(lr.base)) throw ConfigError("learning_rate must be >= 0");
    if (lr.decay_iteration < 0) throw ConfigError("lr_decay_iteration must be >= 0");
    if (!(lr.factor > 0.0)) throw ConfigError("lr_decay_factor must be > 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (embedding_dim == 0) throw ConfigError("net.embedding_dim must be > 0");
    for (std::size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("net.hidden_dims entries must be > 0");
    }
    if (memory_enabled && (!(memory_ratio > 0.0) || memory_ratio > 1.0)) {
        throw ConfigError("memory.ratio must be in (0, 1]");
    }
    loss.validate();
}

std::string metrics_header() { return "iter,phase,loss,valid_neg_mem,valid_neg_batch,lr\n"; }

std::string metrics_row_csv(const MetricsRow& row) {
    std::string out = std::to_string(row.iter);
    out.push_back(',');
    out += row.phase;
    out.push_back(',');
    out += format_double(row.loss);
    out.push_back(',');
    out += std::to_string(row.valid_neg_mem);
    out.push_back(',');
    out += std::to_string(row.valid_neg_batch);
    out.push_back(',');
    out += format_double(row.lr);
    out.push_back('\n');
    return out;
}

TrainResult train(const LabeledDataset& data, const TrainConfig& cfg, std::ostream* metrics_out,
                  const TrainHooks* hooks) {
    cfg.validate();
    if (data.size() == 0) throw ConfigError("train: empty dataset");

    std::vector<std::size_t> dims;
    dims.push_back(data.dim());
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(cfg.embedding_dim);

    // Separate streams so the batch sequence is identical between baseline
    // and memory runs with the same seed.
    TrainResult result;
    result.net = init_params(dims, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::mt19937_64 batch_rng(cfg.seed);
    const std::uint64_t memory_seed = cfg.seed ^ 0xd1b54a32d192ed03ULL;

    AdamState adam = AdamState::for_net(result.net);
    result.metrics.reserve(static_cast<std::size_t>(cfg.iterations));

    if (metrics_out) {
        *metrics_out << metrics_header();
        metrics_out->flush();
    }
    if (hooks && hooks->after_update) hooks->after_update(0, result.net);

    bool warned_replacement = false;
    for (std::int64_t iter = 0; iter < cfg.iterations; ++iter) {
        const bool memory_phase = cfg.memory_enabled && iter >= cfg.warmup_iterations;
        if (cfg.memory_enabled && iter == cfg.warmup_iterations) {
            MemoryConfig mem_cfg;
            mem_cfg.ratio = cfg.memory_ratio;
            mem_cfg.warmup_iterations = cfg.warmup_iterations;
            result.memory = CrossBatchMemory::initialize(result.net, data, mem_cfg,
                                                         cfg.batch_size(), iter, memory_seed);
        }

        const MiniBatch batch = pk_sample(data, cfg.p, cfg.k, batch_rng);
        if (batch.replacement_used && !warned_replacement) {
            warned_replacement = true;
            std::cerr << "warning: some class has fewer than k=" << cfg.k
                      << " instances; sampling with replacement\n";
        }

        auto [embeddings, cache] = result.net.forward(batch.features);

        MetricsRow row;
        row.iter = iter;
        row.lr = cfg.lr.at(iter);

        PairLossResult loss_res;
        if (memory_phase) {
            result.memory->update(embeddings, batch.labels, batch.ids, iter);
            loss_res = result.memory->loss(embeddings, batch.labels, batch.ids, cfg.loss);
            row.phase = "memory";
            row.valid_neg_mem = loss_res.valid_negative_count;
            row.valid_neg_batch = count_valid_negatives(
                self_similarity(embeddings, batch.labels, batch.ids), cfg.loss);
        } else {
            const SimilarityMatrix sim = self_similarity(embeddings, batch.labels, batch.ids);
            loss_res = weighted_pair_loss(sim, pair_weights(sim, cfg.loss));
            row.phase = cfg.memory_enabled ? "warmup" : "batch";
            row.valid_neg_batch = loss_res.valid_negative_count;
        }
        if (!std::isfinite(loss_res.loss)) {
            throw NumericError("train: non-finite loss at iteration " + std::to_string(iter));
        }
        row.loss = loss_res.loss;

        const ParamGradients grads = result.net.backward(cache, loss_res.grad_anchor);
        adam_step(result.net, grads, adam, row.lr, cfg.weight_decay);

        result.metrics.push_back(row);
        if (metrics_out) {
            *metrics_out << metrics_row_csv(row);
            metrics_out->flush();
        }
        if (hooks && hooks->after_update) hooks->after_update(iter + 1, result.net);
    }
    return result;
}

}  // namespace dml
