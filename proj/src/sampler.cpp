#include "dml/sampler.hpp"

#include <algorithm>

namespace dml {

MiniBatch pk_sample(const LabeledDataset& data, std::size_t p, std::size_t k,
                    std::mt19937_64& rng) {
    if (p == 0 || k == 0) throw ConfigError("pk_sample: p and k must be > 0");
    if (data.class_index.size() < p) {
        throw ConfigError("pk_sample: dataset has " + std::to_string(data.class_index.size()) +
                          " classes, need at least " + std::to_string(p));
    }

    std::vector<Label> classes;
    classes.reserve(data.class_index.size());
    for (const auto& [label, rows] : data.class_index) classes.push_back(label);
    std::shuffle(classes.begin(), classes.end(), rng);
    classes.resize(p);

    MiniBatch batch;
    batch.features = DenseMatrix(p * k, data.dim());
    batch.labels.reserve(p * k);
    batch.ids.reserve(p * k);

    std::size_t row = 0;
    for (const Label label : classes) {
        const auto& members = data.class_index.at(label);
        std::vector<std::size_t> picks;
        if (members.size() >= k) {
            picks = members;
            std::shuffle(picks.begin(), picks.end(), rng);
            picks.resize(k);
        } else {
            batch.replacement_used = true;
            std::uniform_int_distribution<std::size_t> dist(0, members.size() - 1);
            picks.reserve(k);
            for (std::size_t i = 0; i < k; ++i) picks.push_back(members[dist(rng)]);
        }
        for (const std::size_t r : picks) {
            for (std::size_t c = 0; c < data.dim(); ++c) {
                batch.features(row, c) = data.features(r, c);
            }
            batch.labels.push_back(data.labels[r]);
            batch.ids.push_back(data.ids[r]);
            ++row;
        }
    }
    return batch;
}

}  // namespace dml
