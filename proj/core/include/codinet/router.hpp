#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codinet/ops.hpp"
#include "codinet/rng.hpp"
#include "codinet/tensor.hpp"

namespace codinet {

enum class GumbelVariant { Reparameterized, StraightThrough };

GumbelVariant gumbel_variant_from_string(const std::string& s);
std::string to_string(GumbelVariant v);

struct GumbelConfig {
    double temperature = 1.0;
    GumbelVariant variant = GumbelVariant::Reparameterized;
    bool inference_noise = false;
};

/// Two-layer FC gate: pooled features -> d hidden (ReLU) -> 2 logits.
/// Output row 0 scores "skip", row 1 scores "run".
struct RouterParams {
    int in_channels = 0;
    int hidden = 0;
    Tensor w1, b1; // [d, C], [d, 1]
    Tensor w2, b2; // [2, d], [2, 1]

    static RouterParams init(int in_channels, int hidden, Rng& rng);
    std::vector<Tensor> parameters();
    std::int64_t parameter_count() const;
};

/// Everything one gate evaluation produced. probs always sums to 1; v is
/// filled by gumbel_relax, u by hard_decision.
struct RouterTrace {
    Tensor z;      // pooled features [C]
    Tensor logits; // [2]
    Tensor probs;  // softmax(logits)
    Tensor v;      // relaxed decision in (0,1), scalar tensor
    int u = -1;    // hard decision, 0 skip / 1 run
    double noise[2] = {0.0, 0.0}; // the Gumbel draws used
};

/// Pool -> FC -> ReLU -> FC -> softmax; fills z, logits, probs.
RouterTrace router_forward(const RouterParams& params, const Tensor& a);

/// Gumbel-Softmax relaxation v = softmax((log probs + g)/T)[1] with
/// g_j = -log(-log(U_j)). The reparameterized variant returns the soft
/// value; the straight-through variant hard-rounds the forward value and
/// keeps the soft gradient.
Tensor gumbel_relax(RouterTrace& trace, const GumbelConfig& cfg, Rng& rng);

/// Same relaxation with caller-supplied noise (used by tests and by the
/// noiseless inference path, which passes zeros).
Tensor gumbel_relax_with_noise(RouterTrace& trace, const GumbelConfig& cfg, double g0, double g1);

/// argmax over the two logits; an exact tie resolves to 1 (run).
int hard_decision(RouterTrace& trace);

} // namespace codinet
