#include "codinet/router.hpp"

#include <cmath>

namespace codinet {

GumbelVariant gumbel_variant_from_string(const std::string& s) {
    if (s == "reparameterized") return GumbelVariant::Reparameterized;
    if (s == "straight-through") return GumbelVariant::StraightThrough;
    throw ConfigError("unknown gumbel variant '" + s + "' (reparameterized | straight-through)");
}

std::string to_string(GumbelVariant v) {
    return v == GumbelVariant::Reparameterized ? "reparameterized" : "straight-through";
}

RouterParams RouterParams::init(int in_channels, int hidden, Rng& rng) {
    if (in_channels <= 0 || hidden <= 0)
        throw ShapeError("router extents must be positive");
    RouterParams p;
    p.in_channels = in_channels;
    p.hidden = hidden;
    const double s1 = std::sqrt(2.0 / in_channels);
    const double s2 = std::sqrt(2.0 / hidden);
    std::vector<double> w1(static_cast<std::size_t>(hidden) * in_channels);
    for (double& x : w1) x = s1 * rng.normal();
    std::vector<double> w2(static_cast<std::size_t>(2) * hidden);
    for (double& x : w2) x = s2 * rng.normal();
    p.w1 = Tensor::from({hidden, in_channels}, std::move(w1), true);
    p.w2 = Tensor::from({2, hidden}, std::move(w2), true);
    p.b1 = Tensor::zeros({hidden, 1}, true);
    p.b2 = Tensor::zeros({2, 1}, true);
    return p;
}

std::vector<Tensor> RouterParams::parameters() { return {w1, b1, w2, b2}; }

std::int64_t RouterParams::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

RouterTrace router_forward(const RouterParams& params, const Tensor& a) {
    if (a.shape().size() != 3 || a.dim(0) != params.in_channels)
        throw ShapeError("router_forward: input " + shape_str(a.shape()) + " does not provide " +
                         std::to_string(params.in_channels) + " channels");
    RouterTrace t;
    t.z = global_avg_pool(a);
    Tensor zc = reshape(t.z, {params.in_channels, 1});
    Tensor h = relu(add(matmul(params.w1, zc), params.b1));
    t.logits = reshape(add(matmul(params.w2, h), params.b2), {2});
    t.probs = softmax(t.logits);
    return t;
}

Tensor gumbel_relax_with_noise(RouterTrace& trace, const GumbelConfig& cfg, double g0, double g1) {
    if (cfg.temperature <= 0.0) throw UsageError("gumbel temperature must be positive");
    trace.noise[0] = g0;
    trace.noise[1] = g1;
    Tensor perturbed = add_const_vec(log_elem(trace.probs), {g0, g1});
    Tensor soft = select(softmax(mul_scalar(perturbed, 1.0 / cfg.temperature)), 1);
    if (cfg.variant == GumbelVariant::StraightThrough)
        soft = straight_through_round(soft);
    trace.v = soft;
    return soft;
}

Tensor gumbel_relax(RouterTrace& trace, const GumbelConfig& cfg, Rng& rng) {
    return gumbel_relax_with_noise(trace, cfg, rng.gumbel(), rng.gumbel());
}

int hard_decision(RouterTrace& trace) {
    const auto lv = trace.logits.value();
    trace.u = lv[1] >= lv[0] ? 1 : 0;
    return trace.u;
}

} // namespace codinet
