#pragma once

#include <vector>

#include "codinet/blocks.hpp"
#include "codinet/net.hpp"

namespace codinet {

struct RegularizerConfig {
    double alpha = 0.2;  // weight of the consistency term
    double beta = 0.2;   // weight of the diversity term
    double gamma = 0.0;  // weight of the cost term
    double margin_consistency = 0.2;
    double margin_diversity = 0.5;

    void validate() const;
};

/// Values of one evaluation of the total objective, plus the group
/// centers that entered the regularizers.
struct LossBreakdown {
    double cls = 0.0;
    double con = 0.0;
    double div = 0.0;
    double cost = 0.0;
    double total = 0.0;
    std::vector<std::vector<double>> centers;

    bool all_finite() const;
};

/// Hinge pull of each relaxed path towards its group center:
///   (1/L)(1/M) sum_i sum_j max(0, ||r_ij - center_i|| - margin)^2
/// Gradients flow into the paths and through the mean. `centers_out`,
/// when given, receives the L center tensors.
Tensor consistency_loss(const std::vector<std::vector<RelaxedPath>>& groups, double margin,
                        std::vector<Tensor>* centers_out = nullptr);

/// Hinge push between group centers over ordered pairs:
///   (1/L)(1/(L-1)) sum_i sum_{j != i} max(0, margin - ||c_i - c_j||)^2
/// With fewer than two centers there are no pairs; returns 0 and warns.
Tensor diversity_loss(const std::vector<Tensor>& centers, double margin);

/// Differentiable expected compute of one path: sum_k entries[k] * v_k.
Tensor cost_loss(const RelaxedPath& path, const std::vector<double>& entries);
/// Batch mean of cost_loss over several paths.
Tensor cost_loss_mean(const std::vector<RelaxedPath>& paths, const std::vector<double>& entries);

struct TotalLoss {
    Tensor value; // graph tensor for backward
    LossBreakdown breakdown;
};

/// total = cls + alpha*con + beta*div + gamma*cost.
TotalLoss total_loss(const Tensor& cls, const Tensor& con, const Tensor& div, const Tensor& cost,
                     const RegularizerConfig& cfg);

} // namespace codinet
