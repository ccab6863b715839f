#include "codinet/optim.hpp"

namespace codinet {

void sgd_update(std::vector<Tensor>& params, SgdState& state) {
    if (state.lr <= 0.0) throw UsageError("sgd_update: lr must be positive");
    if (state.velocity.empty()) {
        state.velocity.reserve(params.size());
        for (const Tensor& p : params)
            state.velocity.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
    }
    if (state.velocity.size() != params.size())
        throw ShapeError("sgd_update: velocity count does not match parameter count");

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto vals = params[pi].mutable_value();
        auto grads = params[pi].grad();
        auto& vel = state.velocity[pi];
        if (vel.size() != vals.size())
            throw ShapeError("sgd_update: velocity shape does not match parameter shape");
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double g = grads[i] + state.weight_decay * vals[i];
            vel[i] = state.momentum * vel[i] + g;
            vals[i] -= state.lr * vel[i];
        }
    }
}

} // namespace codinet
