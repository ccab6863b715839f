#include "codinet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace codinet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int argmax_index(std::span<const double> v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs_stage1 < 0 || epochs_stage2 < 0)
        throw ConfigError("epoch counts must be non-negative");
    if (lr <= 0.0) throw ConfigError("train.lr must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("train.momentum must be in [0,1)");
    if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
    for (std::size_t i = 1; i < milestones.size(); ++i)
        if (milestones[i] <= milestones[i - 1])
            throw ConfigError("train.milestones must be strictly increasing");
    if (batch.groups < 1 || batch.augments_per_group < 1)
        throw ConfigError("batch spec requires L >= 1 and M >= 1");
    reg.validate();
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 0) throw UsageError("lr_at: epoch must be >= 0");
    double rate = cfg.lr;
    for (int m : cfg.milestones)
        if (m <= epoch) rate *= 0.1;
    return rate;
}

void quantize_parameters_float32(std::vector<Tensor> params) {
    for (Tensor& p : params)
        for (double& v : p.mutable_value()) v = static_cast<double>(static_cast<float>(v));
}

EvalResult evaluate_binary(const DynamicNet& net, const std::vector<Sample>& samples,
                           const std::vector<double>& mean, const std::vector<double>& std_dev) {
    EvalResult r;
    r.mean_gates.assign(static_cast<std::size_t>(net.depth()), 0.0);
    if (samples.empty()) return r;
    int correct = 0;
    for (const Sample& s : samples) {
        BinaryForwardResult fwd = forward_binary(net, normalize(s.image, mean, std_dev));
        if (argmax_index(fwd.logits.value()) == s.label) ++correct;
        r.mean_cost_maccs += fwd.cost_maccs;
        for (std::size_t k = 0; k < fwd.relaxed.size(); ++k) r.mean_gates[k] += fwd.relaxed[k];
    }
    const double n = static_cast<double>(samples.size());
    r.accuracy = correct / n;
    r.mean_cost_maccs /= n;
    for (double& g : r.mean_gates) g /= n;
    return r;
}

namespace {

struct StageOutcome {
    TrainReport report;
};

/// Shared epoch loop; `relaxed_stage` selects stage-1 behaviour (full
/// objective, Gumbel noise, all parameters) versus stage-2 (binary gating,
/// cls only, backbone parameters).
TrainReport run_stage(DynamicNet& net, const std::vector<Sample>& train_pool,
                      const std::vector<Sample>& val_pool, const TrainConfig& cfg, bool relaxed_stage,
                      int epochs, int epoch_offset) {
    cfg.validate();
    TrainReport report;
    if (epochs == 0) return report;
    if (train_pool.empty()) throw DataError("training pool is empty");

    const auto t_stage = Clock::now();
    const int iters_per_epoch =
        std::max<int>(1, static_cast<int>(train_pool.size()) / cfg.batch.groups);
    const std::vector<double> cost_fractions = net.cost_table().normalized_fractions();

    SgdState sgd(cfg.lr, cfg.momentum, cfg.weight_decay);
    std::vector<Tensor> params = relaxed_stage ? net.parameters() : net.backbone_parameters();

    Rng master(cfg.seed);
    const std::uint64_t stage_stream = relaxed_stage ? 1 : 2;

    for (int e = 0; e < epochs; ++e) {
        const auto t_epoch = Clock::now();
        const int global_epoch = epoch_offset + e;
        sgd.lr = lr_at(global_epoch, cfg);

        LossBreakdown sums;
        std::vector<double> gate_sums(static_cast<std::size_t>(net.depth()), 0.0);
        std::int64_t items_seen = 0, correct = 0;

        for (int it = 0; it < iters_per_epoch; ++it) {
            const std::uint64_t batch_key =
                (static_cast<std::uint64_t>(global_epoch) << 20) | static_cast<std::uint64_t>(it);
            Rng batch_rng = master.fork(streams::kBatch).fork(stage_stream).fork(batch_key);
            Rng gumbel_rng = master.fork(streams::kGumbel).fork(stage_stream).fork(batch_key);

            GroupedBatch batch = build_grouped_batch(train_pool, cfg.batch, cfg.aug, batch_rng);

            Graph graph;
            std::vector<Tensor> cls_terms;
            std::vector<RelaxedPath> paths; // stage 1 only
            cls_terms.reserve(batch.items.size());

            for (std::size_t bi = 0; bi < batch.items.size(); ++bi) {
                const Sample& item = batch.items[bi];
                Tensor x = normalize(item.image, cfg.mean, cfg.std_dev);
                Tensor logits;
                if (relaxed_stage) {
                    RelaxedForwardResult fwd = forward_relaxed(net, x, gumbel_rng);
                    logits = fwd.logits;
                    for (std::size_t k = 0; k < fwd.path.values.value().size(); ++k)
                        gate_sums[k] += fwd.path.values.value()[k];
                    paths.push_back(std::move(fwd.path));
                } else {
                    // Frozen routers: hard gates computed outside the graph,
                    // skipped blocks are not part of the computation at all.
                    Tensor a = stem_forward(net.stem_head(), x);
                    for (int k = 0; k < net.depth(); ++k) {
                        int u;
                        {
                            GradPause pause;
                            RouterTrace trace =
                                router_forward(net.routers()[static_cast<std::size_t>(k)], a);
                            u = hard_decision(trace);
                            gate_sums[static_cast<std::size_t>(k)] += trace.probs.value()[1];
                        }
                        if (u == 1)
                            a = block_forward(net.blocks()[static_cast<std::size_t>(k)], a);
                    }
                    logits = head_forward(net.stem_head(), a);
                }
                if (argmax_index(logits.value()) == item.label) ++correct;
                cls_terms.push_back(cross_entropy(logits, item.label));
                ++items_seen;
            }

            Tensor cls = mean_of(cls_terms);
            Tensor total;
            if (relaxed_stage) {
                std::vector<std::vector<RelaxedPath>> groups(
                    static_cast<std::size_t>(cfg.batch.groups));
                for (std::size_t bi = 0; bi < paths.size(); ++bi)
                    groups[static_cast<std::size_t>(batch.group_of[bi])].push_back(paths[bi]);

                std::vector<Tensor> centers;
                Tensor con = consistency_loss(groups, cfg.reg.margin_consistency, &centers);
                Tensor div = diversity_loss(centers, cfg.reg.margin_diversity);
                Tensor cost = cost_loss_mean(paths, cost_fractions);
                TotalLoss tl = total_loss(cls, con, div, cost, cfg.reg);
                if (!tl.breakdown.all_finite())
                    throw DivergenceError("non-finite loss at epoch " + std::to_string(global_epoch) +
                                          " iteration " + std::to_string(it));
                sums.cls += tl.breakdown.cls;
                sums.con += tl.breakdown.con;
                sums.div += tl.breakdown.div;
                sums.cost += tl.breakdown.cost;
                sums.total += tl.breakdown.total;
                total = tl.value;
            } else {
                if (!std::isfinite(cls.item()))
                    throw DivergenceError("non-finite loss at epoch " + std::to_string(global_epoch) +
                                          " iteration " + std::to_string(it));
                sums.cls += cls.item();
                sums.total += cls.item();
                total = cls;
            }

            graph.backward(total);
            sgd_update(params, sgd);
            for (Tensor& p : params) p.zero_grad();
            if (cfg.quantize_float32) quantize_parameters_float32(params);
        }

        EpochStats stats;
        stats.epoch = global_epoch;
        stats.stage = relaxed_stage ? 1 : 2;
        stats.lr = sgd.lr;
        const double inv_iters = 1.0 / iters_per_epoch;
        stats.losses.cls = sums.cls * inv_iters;
        stats.losses.con = sums.con * inv_iters;
        stats.losses.div = sums.div * inv_iters;
        stats.losses.cost = sums.cost * inv_iters;
        stats.losses.total = sums.total * inv_iters;
        stats.train_acc = items_seen > 0 ? static_cast<double>(correct) / items_seen : 0.0;
        stats.mean_gates = gate_sums;
        for (double& g : stats.mean_gates) g /= std::max<std::int64_t>(1, items_seen);

        EvalResult val = evaluate_binary(net, val_pool, cfg.mean, cfg.std_dev);
        stats.val_acc = val.accuracy;
        stats.mean_binary_cost_gmaccs = val.mean_cost_maccs / 1e9;
        stats.wall_seconds = seconds_since(t_epoch);
        report.epochs.push_back(std::move(stats));
    }
    report.total_wall_seconds = seconds_since(t_stage);
    return report;
}

} // namespace

TrainReport train_stage1(DynamicNet& net, const std::vector<Sample>& train_pool,
                         const std::vector<Sample>& val_pool, const TrainConfig& cfg) {
    return run_stage(net, train_pool, val_pool, cfg, true, cfg.epochs_stage1, 0);
}

TrainReport finetune_stage2(DynamicNet& net, const std::vector<Sample>& train_pool,
                            const std::vector<Sample>& val_pool, const TrainConfig& cfg,
                            int epoch_offset) {
    return run_stage(net, train_pool, val_pool, cfg, false, cfg.epochs_stage2, epoch_offset);
}

} // namespace codinet
