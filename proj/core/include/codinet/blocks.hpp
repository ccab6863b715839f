#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "codinet/ops.hpp"
#include "codinet/rng.hpp"
#include "codinet/tensor.hpp"

namespace codinet {

enum class BlockKind { ConvResidual, DenseResidual };

BlockKind block_kind_from_string(const std::string& s);
std::string to_string(BlockKind kind);

/// Geometry of one gated block. Shape-preserving by construction: the
/// residual sum needs input and output extents to match.
struct BlockShape {
    BlockKind kind = BlockKind::DenseResidual;
    int channels = 0; // C for conv blocks, D for dense blocks
    int height = 1;   // spatial extents; 1x1 for dense blocks
    int width = 1;
};

/// One skippable residual unit: out = a + f(a), with f either
/// conv-ReLU-conv (3x3, C->C) or FC-ReLU-FC (D->D), biases on both layers.
/// No normalization inside the block.
struct BlockParams {
    BlockShape shape;
    Tensor w1, b1;
    Tensor w2, b2;

    static BlockParams init(const BlockShape& shape, Rng& rng);
    std::vector<Tensor> parameters();
    std::int64_t parameter_count() const;
};

/// Residual forward; `a` must match the block shape (as [C,H,W], with
/// dense activations carried as [D,1,1]).
Tensor block_forward(const BlockParams& block, const Tensor& a);

/// Always-run scaffolding around the gated blocks: an input stem mapping
/// the image into block shape and a global-average-pool + linear head.
struct StemHead {
    BlockKind kind;
    Tensor stem_w, stem_b;
    Tensor head_w, head_b;
    int in_channels = 0, in_height = 0, in_width = 0;
    int channels = 0, num_classes = 0;

    static StemHead init(BlockKind kind, int in_channels, int in_height, int in_width,
                         int channels, int num_classes, Rng& rng);
    std::vector<Tensor> parameters();
};

Tensor stem_forward(const StemHead& sh, const Tensor& image);
Tensor head_forward(const StemHead& sh, const Tensor& features);

/// Per-block multiply-accumulate counts c_k backing the cost loss and the
/// cost reports. Unit: MACCs (GMACCs = entries / 1e9).
struct CostTable {
    std::vector<double> entries;

    double total() const;
    /// Entries rescaled so they sum to 1; used as the differentiable cost
    /// pressure during training (see training module).
    std::vector<double> normalized_fractions() const;
};

/// MACC count of one residual block: conv 2*(H*W*C*C*3*3), dense 2*D*D.
/// Bias and activation costs are excluded.
double block_macc(const BlockShape& shape);

/// Cost table over a network's gated blocks, entry k = block_macc(block k).
CostTable build_cost_table(const std::vector<BlockShape>& gated_blocks);

} // namespace codinet
