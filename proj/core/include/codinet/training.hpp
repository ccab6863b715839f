#pragma once

#include <cstdint>
#include <vector>

#include "codinet/data.hpp"
#include "codinet/losses.hpp"
#include "codinet/net.hpp"
#include "codinet/optim.hpp"

namespace codinet {

struct TrainConfig {
    int epochs_stage1 = 30;
    int epochs_stage2 = 6;
    double lr = 0.1;
    std::vector<int> milestones = {150, 200}; // lr decays by 0.1 at each
    double momentum = 0.9;
    double weight_decay = 1e-4;
    BatchSpec batch;
    RegularizerConfig reg;
    std::uint64_t seed = 1;
    bool quantize_float32 = false; // round parameters to float32 after each step

    AugmentConfig aug;
    std::vector<double> mean = {0.0};
    std::vector<double> std_dev = {1.0};

    void validate() const;
};

struct EpochStats {
    int epoch = 0; // global counter, monotone across both stages
    int stage = 1;
    double lr = 0.0;
    LossBreakdown losses; // means over the epoch's iterations
    double train_acc = 0.0;
    double val_acc = 0.0;
    std::vector<double> mean_gates;     // mean relaxed gate value per block
    double mean_binary_cost_gmaccs = 0.0;
    double wall_seconds = 0.0; // reported in summaries, not in metrics files
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double total_wall_seconds = 0.0;
};

/// lr * 0.1^(number of milestones <= epoch).
double lr_at(int epoch, const TrainConfig& cfg);

/// Stage 1 (end-to-end relaxed training): every iteration builds a grouped
/// batch, runs the relaxed forward with Gumbel noise, applies the full
/// objective to all parameters. Throws DivergenceError if any loss
/// component goes non-finite.
TrainReport train_stage1(DynamicNet& net, const std::vector<Sample>& train_pool,
                         const std::vector<Sample>& val_pool, const TrainConfig& cfg);

/// Stage 2 (router-frozen finetuning): binary gating, gates are constants
/// outside the graph, classification loss only, blocks/stem/head updated.
/// The global epoch counter continues after `epoch_offset`.
TrainReport finetune_stage2(DynamicNet& net, const std::vector<Sample>& train_pool,
                            const std::vector<Sample>& val_pool, const TrainConfig& cfg,
                            int epoch_offset = 0);

struct EvalResult {
    double accuracy = 0.0;
    double mean_cost_maccs = 0.0;
    std::vector<double> mean_gates;
};

/// Deterministic binary-gated evaluation over a sample list.
EvalResult evaluate_binary(const DynamicNet& net, const std::vector<Sample>& samples,
                           const std::vector<double>& mean, const std::vector<double>& std_dev);

/// Rounds every parameter through IEEE-754 float32 (the stored precision
/// of float32 checkpoints).
void quantize_parameters_float32(std::vector<Tensor> params);

} // namespace codinet
