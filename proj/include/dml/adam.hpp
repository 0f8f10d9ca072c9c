#pragma once

#include <cstdint>

#include "dml/net.hpp"

namespace dml {

// Bias-corrected Adam. Weight decay enters as an additive L2 term on the
// gradient before the moment updates.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    ParamGradients m;  // first moments, congruent with the net's parameters
    ParamGradients v;  // second moments

    static AdamState for_net(const EmbeddingNet& net);
};

void adam_step(EmbeddingNet& net, const ParamGradients& grads, AdamState& state, double lr,
               double weight_decay);

}  // namespace dml
