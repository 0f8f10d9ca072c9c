#include "dml/net.hpp"

#include <cmath>
#include <random>
#include <string>

namespace dml {

double squared_l2(const ParamGradients& g) {
    double s = 0.0;
    for (const auto& layer : g.layers) {
        s += squared_l2(std::span<const double>(layer.weight.data()));
        s += squared_l2(std::span<const double>(layer.bias));
    }
    return s;
}

ParamGradients subtract(const ParamGradients& a, const ParamGradients& b) {
    if (a.layers.size() != b.layers.size()) {
        throw ShapeError("ParamGradients subtract: layer counts differ");
    }
    ParamGradients out;
    out.layers.reserve(a.layers.size());
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto& ga = a.layers[l];
        const auto& gb = b.layers[l];
        if (!ga.weight.same_shape(gb.weight) || ga.bias.size() != gb.bias.size()) {
            throw ShapeError("ParamGradients subtract: layer shapes differ");
        }
        ParamGradients::LayerGrad d;
        d.weight = DenseMatrix(ga.weight.rows(), ga.weight.cols());
        for (std::size_t i = 0; i < ga.weight.size(); ++i) {
            d.weight.data()[i] = ga.weight.data()[i] - gb.weight.data()[i];
        }
        d.bias.resize(ga.bias.size());
        for (std::size_t i = 0; i < ga.bias.size(); ++i) d.bias[i] = ga.bias[i] - gb.bias[i];
        out.layers.push_back(std::move(d));
    }
    return out;
}

EmbeddingNet::EmbeddingNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) {
        throw ShapeError("EmbeddingNet: needs at least one layer");
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        if (layer.weight.rows() == 0 || layer.weight.cols() == 0) {
            throw ShapeError("EmbeddingNet: layer " + std::to_string(l) + " has empty weight");
        }
        if (layer.bias.size() != layer.weight.rows()) {
            throw ShapeError("EmbeddingNet: layer " + std::to_string(l) + " bias size " +
                             std::to_string(layer.bias.size()) + " vs out dim " +
                             std::to_string(layer.weight.rows()));
        }
        if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows()) {
            throw ShapeError("EmbeddingNet: layer " + std::to_string(l) + " in dim " +
                             std::to_string(layer.weight.cols()) + " vs previous out dim " +
                             std::to_string(layers_[l - 1].weight.rows()));
        }
    }
}

Layer& EmbeddingNet::mutable_layer(std::size_t i) {
    ++version_;
    return layers_[i];
}

std::size_t EmbeddingNet::input_dim() const {
    if (layers_.empty()) throw ShapeError("EmbeddingNet: empty");
    return layers_.front().weight.cols();
}

std::size_t EmbeddingNet::output_dim() const {
    if (layers_.empty()) throw ShapeError("EmbeddingNet: empty");
    return layers_.back().weight.rows();
}

namespace {

// z = x * W^T + b
DenseMatrix affine(const DenseMatrix& x, const Layer& layer) {
    DenseMatrix z = matmul_transposed(x, layer.weight);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += layer.bias[j];
    }
    return z;
}

DenseMatrix relu(const DenseMatrix& z) {
    DenseMatrix a = z;
    for (double& x : a.data()) x = x > 0.0 ? x : 0.0;
    return a;
}

}  // namespace

std::pair<DenseMatrix, ForwardCache> EmbeddingNet::forward(const DenseMatrix& batch) const {
    if (layers_.empty()) throw ShapeError("EmbeddingNet::forward: empty net");
    if (batch.cols() != input_dim()) {
        throw ShapeError("EmbeddingNet::forward: batch cols " + std::to_string(batch.cols()) +
                         " vs input dim " + std::to_string(input_dim()));
    }
    ForwardCache cache;
    cache.net = this;
    cache.net_version = version_;

    DenseMatrix act = batch;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        cache.inputs.push_back(act);
        DenseMatrix z = affine(act, layers_[l]);
        cache.preacts.push_back(z);
        act = (l + 1 < layers_.size()) ? relu(z) : std::move(z);
    }
    DenseMatrix emb = l2_normalize_rows(act);
    ensure_finite(emb, "EmbeddingNet::forward");
    return {std::move(emb), std::move(cache)};
}

ParamGradients EmbeddingNet::backward(ForwardCache& cache,
                                      const DenseMatrix& grad_embeddings) const {
    if (cache.net != this || cache.net_version != version_) {
        throw ContractError("EmbeddingNet::backward: cache is stale or from another net");
    }
    if (cache.consumed) {
        throw ContractError("EmbeddingNet::backward: cache already consumed");
    }
    const DenseMatrix& prenorm = cache.preacts.back();
    if (!grad_embeddings.same_shape(prenorm)) {
        throw ShapeError("EmbeddingNet::backward: grad shape mismatch");
    }
    cache.consumed = true;

    // Through the row-wise normalization.
    DenseMatrix grad(prenorm.rows(), prenorm.cols());
    for (std::size_t i = 0; i < prenorm.rows(); ++i) {
        auto g = l2_normalize_backward(prenorm.row(i), grad_embeddings.row(i));
        for (std::size_t j = 0; j < prenorm.cols(); ++j) grad(i, j) = g[j];
    }

    ParamGradients grads = zero_gradients();
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l + 1 < layers_.size()) {
            // ReLU pullback; subgradient 0 at 0.
            const DenseMatrix& z = cache.preacts[l];
            for (std::size_t i = 0; i < grad.size(); ++i) {
                if (!(z.data()[i] > 0.0)) grad.data()[i] = 0.0;
            }
        }
        const DenseMatrix& input = cache.inputs[l];
        auto& lg = grads.layers[l];
        // dW = grad^T * input, summed over the batch.
        for (std::size_t i = 0; i < grad.rows(); ++i) {
            for (std::size_t o = 0; o < grad.cols(); ++o) {
                const double g = grad(i, o);
                lg.bias[o] += g;
                for (std::size_t j = 0; j < input.cols(); ++j) {
                    lg.weight(o, j) += g * input(i, j);
                }
            }
        }
        if (l > 0) {
            grad = matmul(grad, layers_[l].weight);
        }
    }
    return grads;
}

ParamGradients EmbeddingNet::zero_gradients() const {
    ParamGradients g;
    g.layers.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        g.layers[l].weight = DenseMatrix(layers_[l].weight.rows(), layers_[l].weight.cols());
        g.layers[l].bias.assign(layers_[l].bias.size(), 0.0);
    }
    return g;
}

EmbeddingNet init_params(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) {
        throw ShapeError("init_params: need at least input and embedding dims");
    }
    for (std::size_t d : dims) {
        if (d == 0) throw ShapeError("init_params: zero dimension");
    }
    std::mt19937_64 rng(seed);
    std::vector<Layer> layers;
    layers.reserve(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        // Uniform with variance 1/fan_in.
        const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Layer layer;
        layer.weight = DenseMatrix(fan_out, fan_in);
        for (double& w : layer.weight.data()) w = dist(rng);
        layer.bias.assign(fan_out, 0.0);
        layers.push_back(std::move(layer));
    }
    return EmbeddingNet(std::move(layers));
}

}  // namespace dml
