#pragma once

#include <vector>

#include "codinet/tensor.hpp"

namespace codinet {

/// SGD with momentum; weight decay is folded into the gradient before the
/// momentum update (classic formulation):
///   g' = grad + weight_decay * param
///   velocity = momentum * velocity + g'
///   param -= lr * velocity
struct SgdState {
    double lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::vector<std::vector<double>> velocity; // one buffer per parameter

    SgdState() = default;
    SgdState(double lr_, double momentum_, double weight_decay_)
        : lr(lr_), momentum(momentum_), weight_decay(weight_decay_) {}
};

/// One optimizer step over `params`, reading each tensor's accumulated
/// gradient. Velocity buffers are created on first use and must keep
/// matching shapes afterwards.
void sgd_update(std::vector<Tensor>& params, SgdState& state);

} // namespace codinet
