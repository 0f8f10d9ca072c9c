#include "dml/adam.hpp"

#include <cmath>
#include <string>

namespace dml {

AdamState AdamState::for_net(const EmbeddingNet& net) {
    AdamState state;
    state.m = net.zero_gradients();
    state.v = net.zero_gradients();
    return state;
}

namespace {

void update_span(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamState& st, double lr, double weight_decay,
                 double bias1, double bias2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i] + weight_decay * param[i];
        m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g;
        v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g * g;
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + st.epsilon);
    }
}

}  // namespace

void adam_step(EmbeddingNet& net, const ParamGradients& grads, AdamState& state, double lr,
               double weight_decay) {
    if (grads.layers.size() != net.layer_count() ||
        state.m.layers.size() != net.layer_count()) {
        throw ShapeError("adam_step: gradient/state layer count mismatch");
    }
    if (!(lr >= 0.0) || !(weight_decay >= 0.0)) {
        throw ConfigError("adam_step: lr and weight_decay must be >= 0");
    }
    ++state.step;
    const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        Layer& layer = net.mutable_layer(l);
        if (!grads.layers[l].weight.same_shape(layer.weight) ||
            grads.layers[l].bias.size() != layer.bias.size() ||
            !state.m.layers[l].weight.same_shape(layer.weight) ||
            state.m.layers[l].bias.size() != layer.bias.size()) {
            throw ShapeError("adam_step: layer " + std::to_string(l) + " shape mismatch");
        }
        update_span(layer.weight.data(), grads.layers[l].weight.data(),
                    state.m.layers[l].weight.data(), state.v.layers[l].weight.data(), state,
                    lr, weight_decay, bias1, bias2);
        update_span(layer.bias, grads.layers[l].bias, state.m.layers[l].bias,
                    state.v.layers[l].bias, state, lr, weight_decay, bias1, bias2);
    }
}

}  // namespace dml
