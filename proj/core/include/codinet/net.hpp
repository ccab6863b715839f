#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

#include "codinet/blocks.hpp"
#include "codinet/router.hpp"

namespace codinet {

/// Per-sample run/skip decisions, one bit per gated block.
struct RoutingPath {
    std::vector<std::uint8_t> bits;

    int popcount() const;
    std::string to_string() const; // e.g. "101101"
    static RoutingPath from_string(const std::string& s);
    bool operator==(const RoutingPath&) const = default;
};

/// Relaxed decisions in [0,1]^n. During training `values` is a graph
/// tensor, so the path carries gradients.
struct RelaxedPath {
    Tensor values; // [n]
};

struct NetSpec {
    BlockKind kind = BlockKind::DenseResidual;
    int depth = 6;       // number of gated blocks n
    int channels = 256;  // C for conv blocks, D for dense blocks
    int in_channels = 1;
    int in_height = 16;
    int in_width = 16;
    int num_classes = 8;
    int router_hidden = 4;
};

/// Stem, n gated residual blocks with per-block routers, and a
/// pool+linear head. Blocks and routers line up one-to-one with the cost
/// table.
class DynamicNet {
public:
    DynamicNet() = default;
    DynamicNet(DynamicNet&& other) noexcept;
    DynamicNet& operator=(DynamicNet&& other) noexcept;
    DynamicNet(const DynamicNet&) = delete;
    DynamicNet& operator=(const DynamicNet&) = delete;

    static DynamicNet build(const NetSpec& spec, const GumbelConfig& gumbel, Rng& rng);

    const NetSpec& spec() const { return spec_; }
    const GumbelConfig& gumbel() const { return gumbel_; }
    GumbelConfig& gumbel() { return gumbel_; }
    int depth() const { return spec_.depth; }
    const CostTable& cost_table() const { return cost_table_; }

    StemHead& stem_head() { return stem_head_; }
    const StemHead& stem_head() const { return stem_head_; }
    std::vector<BlockParams>& blocks() { return blocks_; }
    const std::vector<BlockParams>& blocks() const { return blocks_; }
    std::vector<RouterParams>& routers() { return routers_; }
    const std::vector<RouterParams>& routers() const { return routers_; }

    std::vector<Tensor> parameters();        // all
    std::vector<Tensor> backbone_parameters(); // stem, blocks, head
    std::vector<Tensor> router_parameters();

    /// Cumulative count of block evaluations; forward_binary increments it
    /// once per block actually run.
    std::uint64_t block_evals() const { return block_evals_.load(std::memory_order_relaxed); }
    void reset_block_evals() { block_evals_.store(0, std::memory_order_relaxed); }
    void count_block_eval() const { block_evals_.fetch_add(1, std::memory_order_relaxed); }

private:
    NetSpec spec_;
    GumbelConfig gumbel_;
    StemHead stem_head_;
    std::vector<BlockParams> blocks_;
    std::vector<RouterParams> routers_;
    CostTable cost_table_;
    mutable std::atomic<std::uint64_t> block_evals_{0};
};

struct RelaxedForwardResult {
    Tensor logits;    // [num_classes]
    RelaxedPath path; // gate values, graph-connected unless gates were forced
};

struct BinaryForwardResult {
    Tensor logits;
    RoutingPath path;
    std::vector<double> relaxed; // noiseless v_k = probs[1] per gate
    double cost_maccs = 0.0;
    int blocks_executed = 0;
};

/// Training-mode forward: every block and router executes, block outputs
/// are mixed as a_k = v_k * F_k(a_{k-1}) + (1 - v_k) * a_{k-1}. Gumbel
/// noise is drawn from `rng` (two draws per gate) unless `forced_gates`
/// supplies fixed gate values.
RelaxedForwardResult forward_relaxed(DynamicNet& net, const Tensor& x, Rng& rng,
                                     const std::optional<std::vector<double>>& forced_gates = {});

/// Deployment-mode forward: deterministic, noiseless; a block runs iff
/// its noiseless v >= 0.5 and skipped blocks are genuinely not evaluated.
/// cost_maccs sums the cost-table entries of the executed blocks. When the
/// net's gumbel config sets inference_noise and `noise_rng` is given, the
/// thresholded v is noise-perturbed instead.
BinaryForwardResult forward_binary(const DynamicNet& net, const Tensor& x,
                                   Rng* noise_rng = nullptr);

/// Elementwise mean of relaxed paths (the group center r-bar),
/// differentiable through every input.
Tensor group_center(const std::vector<RelaxedPath>& paths);

/// Overwrites a router's second-layer bias so the gate is pinned to run
/// (decision=1) or skip (decision=0) regardless of input.
void force_router_bias(RouterParams& router, bool run, double strength = 25.0);

} // namespace codinet
