#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dml/matrix.hpp"
#include "dml/pair_loss.hpp"

namespace dml {

// Instance ids are the row indices 0..N-1.
struct LabeledDataset {
    DenseMatrix features;  // N x d_in
    std::vector<Label> labels;
    std::vector<InstanceId> ids;
    std::map<Label, std::vector<std::size_t>> class_index;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

// Builds ids and the label -> row-indices map; validates label count.
LabeledDataset make_dataset(DenseMatrix features, std::vector<Label> labels);

// Rows picked into a new dataset; ids are renumbered 0..n-1.
LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& rows);

// Gaussian blobs: class centers uniform on the sphere of radius
// center_scale, instances = center + N(0, noise_sigma^2) per coordinate.
LabeledDataset synth_clusters(std::size_t num_classes, std::size_t per_class,
                              std::size_t dim, double center_scale, double noise_sigma,
                              std::uint64_t seed);

struct DelimitedSchema {
    char delimiter = ',';
    std::size_t label_col = 0;
    bool has_header = false;
};

// Text table -> dataset. Ragged rows or unparsable numerics raise ParseError
// with the 1-based line number; a missing file raises IoError.
LabeledDataset load_delimited(const std::string& path, const DelimitedSchema& schema);
void save_delimited(const std::string& path, const LabeledDataset& data,
                    const DelimitedSchema& schema);

}  // namespace dml
