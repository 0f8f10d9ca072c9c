#pragma once

#include <random>

#include "dml/dataset.hpp"

namespace dml {

struct MiniBatch {
    DenseMatrix features;  // (p*k) x d_in, grouped by class
    std::vector<Label> labels;
    std::vector<InstanceId> ids;
    bool replacement_used = false;  // some class had fewer than k instances
};

// Draws p distinct classes uniformly, then k instances per class without
// replacement (with replacement plus a flag when a class is smaller than k).
// Fewer than p populated classes is a config error.
MiniBatch pk_sample(const LabeledDataset& data, std::size_t p, std::size_t k,
                    std::mt19937_64& rng);

}  // namespace dml
