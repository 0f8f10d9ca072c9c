#include "dml/memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace dml {

void MemoryConfig::validate() const {
    if (!(ratio > 0.0) || ratio > 1.0) {
        throw ConfigError("memory.ratio must be in (0, 1]");
    }
    if (warmup_iterations < 0) {
        throw ConfigError("warmup_iterations must be >= 0");
    }
}

std::size_t derive_capacity(double ratio, std::size_t dataset_size, std::size_t batch_size) {
    if (!(ratio > 0.0) || ratio > 1.0) {
        throw ConfigError("memory.ratio must be in (0, 1]");
    }
    const auto capacity =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(dataset_size)));
    if (capacity > dataset_size) {
        throw ConfigError("memory capacity " + std::to_string(capacity) +
                          " exceeds dataset size " + std::to_string(dataset_size));
    }
    if (capacity < batch_size) {
        throw ConfigError("memory capacity " + std::to_string(capacity) +
                          " is smaller than batch size " + std::to_string(batch_size));
    }
    return capacity;
}

CrossBatchMemory::CrossBatchMemory(std::size_t capacity, std::size_t dataset_size)
    : capacity_(capacity), dataset_size_(dataset_size) {
    if (capacity_ == 0) throw ConfigError("memory capacity must be > 0");
    if (capacity_ > dataset_size_) {
        throw ConfigError("memory capacity " + std::to_string(capacity_) +
                          " exceeds dataset size " + std::to_string(dataset_size_));
    }
}

CrossBatchMemory CrossBatchMemory::initialize(const EmbeddingNet& net, const LabeledDataset& data,
                                              const MemoryConfig& cfg, std::size_t batch_size,
                                              std::int64_t iteration, std::uint64_t seed) {
    cfg.validate();
    const std::size_t capacity = derive_capacity(cfg.ratio, data.size(), batch_size);
    CrossBatchMemory mem(capacity, data.size());

    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(capacity);

    DenseMatrix batch(capacity, data.dim());
    std::vector<Label> labels(capacity);
    std::vector<InstanceId> ids(capacity);
    for (std::size_t i = 0; i < capacity; ++i) {
        const std::size_t r = rows[i];
        for (std::size_t c = 0; c < data.dim(); ++c) batch(i, c) = data.features(r, c);
        labels[i] = data.labels[r];
        ids[i] = data.ids[r];
    }
    auto [embeddings, cache] = net.forward(batch);
    mem.update(embeddings, labels, ids, iteration);
    return mem;
}

void CrossBatchMemory::update(const DenseMatrix& embeddings, std::span<const Label> labels,
                              std::span<const InstanceId> ids, std::int64_t iteration) {
    const std::size_t b = embeddings.rows();
    if (b > capacity_) {
        throw ContractError("CrossBatchMemory::update: batch of " + std::to_string(b) +
                            " exceeds capacity " + std::to_string(capacity_));
    }
    if (labels.size() != b || ids.size() != b) {
        throw ShapeError("CrossBatchMemory::update: labels/ids do not match batch rows");
    }
    if (dim_ == 0) {
        dim_ = embeddings.cols();
    } else if (embeddings.cols() != dim_) {
        throw ShapeError("CrossBatchMemory::update: embedding dim changed");
    }
    for (std::size_t i = 0; i < b; ++i) {
        MemoryEntry e;
        auto row = embeddings.row(i);
        e.embedding.assign(row.begin(), row.end());
        e.label = labels[i];
        e.id = ids[i];
        e.iteration = iteration;
        entries_.push_back(std::move(e));
    }
    while (entries_.size() > capacity_) entries_.pop_front();
}

DenseMatrix CrossBatchMemory::embedding_matrix() const {
    DenseMatrix m(entries_.size(), dim_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        for (std::size_t j = 0; j < dim_; ++j) m(i, j) = entries_[i].embedding[j];
    }
    return m;
}

std::vector<Label> CrossBatchMemory::stored_labels() const {
    std::vector<Label> out(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) out[i] = entries_[i].label;
    return out;
}

std::vector<InstanceId> CrossBatchMemory::stored_ids() const {
    std::vector<InstanceId> out(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) out[i] = entries_[i].id;
    return out;
}

SimilarityMatrix CrossBatchMemory::similarity_to(const DenseMatrix& anchors,
                                                 std::span<const Label> labels,
                                                 std::span<const InstanceId> ids) const {
    if (entries_.empty()) {
        throw ContractError("CrossBatchMemory: empty memory");
    }
    return similarity(anchors, embedding_matrix(),
                      std::vector<Label>(labels.begin(), labels.end()), stored_labels(),
                      std::vector<InstanceId>(ids.begin(), ids.end()), stored_ids());
}

PairLossResult CrossBatchMemory::loss(const DenseMatrix& anchors, std::span<const Label> labels,
                                      std::span<const InstanceId> ids,
                                      const LossHyperparams& h) const {
    const SimilarityMatrix sim = similarity_to(anchors, labels, ids);
    return weighted_pair_loss(sim, pair_weights(sim, h));
}

MiningCounts CrossBatchMemory::stats(const DenseMatrix& anchors, std::span<const Label> labels,
                                     std::span<const InstanceId> ids,
                                     const LossHyperparams& h) const {
    MiningCounts counts;
    counts.valid_from_memory = count_valid_negatives(similarity_to(anchors, labels, ids), h);
    const SimilarityMatrix batch_sim = self_similarity(
        anchors, std::vector<Label>(labels.begin(), labels.end()),
        std::vector<InstanceId>(ids.begin(), ids.end()));
    counts.valid_from_batch = count_valid_negatives(batch_sim, h);
    return counts;
}

}  // namespace dml
