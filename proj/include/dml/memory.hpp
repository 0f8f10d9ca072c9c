#pragma once

#include <cstdint>
#include <deque>
#include <span>

#include "dml/dataset.hpp"
#include "dml/net.hpp"
#include "dml/pair_loss.hpp"

namespace dml {

struct MemoryConfig {
    double ratio = 1.0;               // capacity = round(ratio * dataset size)
    std::int64_t warmup_iterations = 200;

    void validate() const;  // throws ConfigError
};

struct MemoryEntry {
    std::vector<double> embedding;  // detached copy, unit norm
    Label label = 0;
    InstanceId id = 0;
    std::int64_t iteration = 0;  // when this entry was written
};

struct MiningCounts {
    std::size_t valid_from_memory = 0;
    std::size_t valid_from_batch = 0;
};

// FIFO queue of embeddings from past batches. Entries are plain values:
// nothing references live network state, so gradients never flow into them.
class CrossBatchMemory {
public:
    CrossBatchMemory(std::size_t capacity, std::size_t dataset_size);

    // Warm-start fill: embeds `capacity` instances sampled without
    // replacement (seeded) using the current model.
    static CrossBatchMemory initialize(const EmbeddingNet& net, const LabeledDataset& data,
                                       const MemoryConfig& cfg, std::size_t batch_size,
                                       std::int64_t iteration, std::uint64_t seed);

    // Enqueues the batch (oldest-first eviction once past capacity).
    void update(const DenseMatrix& embeddings, std::span<const Label> labels,
                std::span<const InstanceId> ids, std::int64_t iteration);

    // Weighted pair loss of the anchors against everything stored.
    PairLossResult loss(const DenseMatrix& anchors, std::span<const Label> labels,
                        std::span<const InstanceId> ids, const LossHyperparams& h) const;

    // Valid negatives available from memory vs from the batch itself.
    MiningCounts stats(const DenseMatrix& anchors, std::span<const Label> labels,
                       std::span<const InstanceId> ids, const LossHyperparams& h) const;

    SimilarityMatrix similarity_to(const DenseMatrix& anchors, std::span<const Label> labels,
                                   std::span<const InstanceId> ids) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t dataset_size() const { return dataset_size_; }
    bool empty() const { return entries_.empty(); }
    // FIFO order: index 0 is the oldest entry.
    const MemoryEntry& entry(std::size_t i) const { return entries_[i]; }

    DenseMatrix embedding_matrix() const;
    std::vector<Label> stored_labels() const;
    std::vector<InstanceId> stored_ids() const;

private:
    std::size_t capacity_;
    std::size_t dataset_size_;
    std::size_t dim_ = 0;
    std::deque<MemoryEntry> entries_;
};

// capacity = round(ratio * dataset_size); validates batch_size <= capacity <= N.
std::size_t derive_capacity(double ratio, std::size_t dataset_size, std::size_t batch_size);

}  // namespace dml
