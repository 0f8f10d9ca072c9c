#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dml/matrix.hpp"

namespace dml {

// One affine layer: out = in * weight^T + bias. weight is (out_dim x in_dim).
struct Layer {
    DenseMatrix weight;
    std::vector<double> bias;
};

struct ParamGradients {
    struct LayerGrad {
        DenseMatrix weight;
        std::vector<double> bias;
    };
    std::vector<LayerGrad> layers;
};

double squared_l2(const ParamGradients& g);
ParamGradients subtract(const ParamGradients& a, const ParamGradients& b);

class EmbeddingNet;

// Captures everything backward needs from one forward pass. Single use:
// consumed by backward, and invalidated by any later parameter mutation.
class ForwardCache {
public:
    ForwardCache(const ForwardCache&) = delete;
    ForwardCache& operator=(const ForwardCache&) = delete;
    ForwardCache(ForwardCache&&) = default;
    ForwardCache& operator=(ForwardCache&&) = default;

private:
    friend class EmbeddingNet;
    ForwardCache() = default;

    const EmbeddingNet* net = nullptr;
    std::uint64_t net_version = 0;
    std::vector<DenseMatrix> inputs;    // input fed to each layer
    std::vector<DenseMatrix> preacts;   // affine outputs, last one pre-normalization
    bool consumed = false;
};

// MLP with ReLU between affine layers and row-wise L2 normalization on the
// output, so embeddings live on the unit sphere. Gradients are computed by
// the explicit reverse pass in backward(); there is no autograd.
class EmbeddingNet {
public:
    EmbeddingNet() = default;
    explicit EmbeddingNet(std::vector<Layer> layers);

    std::size_t layer_count() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return layers_[i]; }
    // Mutation handle; bumps the version so stale caches are rejected.
    Layer& mutable_layer(std::size_t i);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::uint64_t version() const { return version_; }

    // batch is (m x input_dim); returns (m x output_dim) unit rows plus the
    // cache for one backward pass.
    std::pair<DenseMatrix, ForwardCache> forward(const DenseMatrix& batch) const;

    // grad_embeddings is dLoss/d(embeddings), same shape as forward's output.
    // Gradients are summed over the batch. Marks the cache consumed.
    ParamGradients backward(ForwardCache& cache, const DenseMatrix& grad_embeddings) const;

    ParamGradients zero_gradients() const;

private:
    std::vector<Layer> layers_;
    std::uint64_t version_ = 0;
};

// Builds a net for dims = {input, hidden..., embedding}: one layer per
// adjacent pair. Weights are zero-mean uniform with variance 1/fan_in,
// biases zero, deterministic per seed.
EmbeddingNet init_params(const std::vector<std::size_t>& dims, std::uint64_t seed);

}  // namespace dml
