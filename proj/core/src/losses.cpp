#include "codinet/losses.hpp"

#include <cmath>
#include <iostream>

namespace codinet {

void RegularizerConfig::validate() const {
    if (alpha < 0.0) throw ConfigError("loss.alpha must be >= 0");
    if (beta < 0.0) throw ConfigError("loss.beta must be >= 0");
    if (gamma < 0.0) throw ConfigError("loss.gamma must be >= 0");
    if (margin_consistency < 0.0) throw ConfigError("loss.margin_consistency must be >= 0");
    if (margin_diversity < 0.0) throw ConfigError("loss.margin_diversity must be >= 0");
}

bool LossBreakdown::all_finite() const {
    return std::isfinite(cls) && std::isfinite(con) && std::isfinite(div) && std::isfinite(cost) &&
           std::isfinite(total);
}

namespace {

Tensor squared_distance(const Tensor& a, const Tensor& b) {
    Tensor d = sub(a, b);
    return dot(d, d);
}

} // namespace

Tensor consistency_loss(const std::vector<std::vector<RelaxedPath>>& groups, double margin,
                        std::vector<Tensor>* centers_out) {
    if (groups.empty()) throw UsageError("consistency_loss: no groups");
    const std::size_t members = groups.front().size();
    if (members == 0) throw UsageError("consistency_loss: empty group");
    for (const auto& g : groups)
        if (g.size() != members)
            throw UsageError("consistency_loss: ragged group sizes");

    if (centers_out) centers_out->clear();
    Tensor acc = Tensor::scalar(0.0);
    for (const auto& group : groups) {
        Tensor center = group_center(group);
        if (centers_out) centers_out->push_back(center);
        for (const RelaxedPath& r : group)
            acc = add(acc, hinge_sq_over(squared_distance(r.values, center), margin));
    }
    const double norm = 1.0 / (static_cast<double>(groups.size()) * static_cast<double>(members));
    return mul_scalar(acc, norm);
}

Tensor diversity_loss(const std::vector<Tensor>& centers, double margin) {
    const std::size_t l = centers.size();
    if (l < 2) {
        std::clog << "[codinet] diversity_loss: fewer than two groups, no pairs to separate\n";
        return Tensor::scalar(0.0);
    }
    Tensor acc = Tensor::scalar(0.0);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) {
            if (i == j) continue;
            acc = add(acc, hinge_sq_under(squared_distance(centers[i], centers[j]), margin));
        }
    const double norm = 1.0 / (static_cast<double>(l) * static_cast<double>(l - 1));
    return mul_scalar(acc, norm);
}

Tensor cost_loss(const RelaxedPath& path, const std::vector<double>& entries) {
    if (entries.size() != static_cast<std::size_t>(path.values.size()))
        throw ShapeError("cost_loss: table length " + std::to_string(entries.size()) +
                         " does not match path length " + std::to_string(path.values.size()));
    Tensor table = Tensor::from({static_cast<int>(entries.size())},
                                std::vector<double>(entries.begin(), entries.end()));
    return dot(path.values, table);
}

Tensor cost_loss_mean(const std::vector<RelaxedPath>& paths, const std::vector<double>& entries) {
    if (paths.empty()) throw UsageError("cost_loss_mean: no paths");
    Tensor acc = Tensor::scalar(0.0);
    for (const RelaxedPath& p : paths) acc = add(acc, cost_loss(p, entries));
    return mul_scalar(acc, 1.0 / static_cast<double>(paths.size()));
}

TotalLoss total_loss(const Tensor& cls, const Tensor& con, const Tensor& div, const Tensor& cost,
                     const RegularizerConfig& cfg) {
    TotalLoss out;
    Tensor t = add(cls, mul_scalar(con, cfg.alpha));
    t = add(t, mul_scalar(div, cfg.beta));
    t = add(t, mul_scalar(cost, cfg.gamma));
    out.value = t;
    out.breakdown.cls = cls.item();
    out.breakdown.con = con.item();
    out.breakdown.div = div.item();
    out.breakdown.cost = cost.item();
    out.breakdown.total = t.item();
    return out;
}

} // namespace codinet
