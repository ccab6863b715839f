#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "codinet/losses.hpp"

using namespace codinet;

namespace {

RelaxedPath path(std::vector<double> v, bool requires_grad = false) {
    const int n = static_cast<int>(v.size());
    RelaxedPath p;
    p.values = Tensor::from({n}, std::move(v), requires_grad);
    return p;
}

// Brute-force evaluation of the consistency objective, kept independent of
// the tensor implementation.
double brute_consistency(const std::vector<std::vector<std::vector<double>>>& groups, double mc) {
    const std::size_t l = groups.size();
    const std::size_t m = groups.front().size();
    double total = 0.0;
    for (const auto& group : groups) {
        const std::size_t n = group.front().size();
        std::vector<double> center(n, 0.0);
        for (const auto& r : group)
            for (std::size_t i = 0; i < n; ++i) center[i] += r[i];
        for (double& c : center) c /= static_cast<double>(m);
        for (const auto& r : group) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) d2 += (r[i] - center[i]) * (r[i] - center[i]);
            const double h = std::max(0.0, std::sqrt(d2) - mc);
            total += h * h;
        }
    }
    return total / (static_cast<double>(l) * static_cast<double>(m));
}

double brute_diversity(const std::vector<std::vector<double>>& centers, double md) {
    const std::size_t l = centers.size();
    double total = 0.0;
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) {
            if (i == j) continue;
            double d2 = 0.0;
            for (std::size_t k = 0; k < centers[i].size(); ++k)
                d2 += (centers[i][k] - centers[j][k]) * (centers[i][k] - centers[j][k]);
            const double h = std::max(0.0, md - std::sqrt(d2));
            total += h * h;
        }
    return total / (static_cast<double>(l) * static_cast<double>(l - 1));
}

} // namespace

TEST_CASE("consistency loss zero cases") {
    SUBCASE("identical paths in every group") {
        std::vector<std::vector<RelaxedPath>> groups{{path({0.3, 0.7}), path({0.3, 0.7})},
                                                     {path({0.9, 0.1}), path({0.9, 0.1})}};
        CHECK(consistency_loss(groups, 0.2).item() == 0.0);
    }
    SUBCASE("hinge inactive while every member is within the margin") {
        std::vector<std::vector<RelaxedPath>> groups{{path({0.5, 0.5}), path({0.55, 0.5})}};
        CHECK(consistency_loss(groups, 0.2).item() == 0.0);
    }
}

TEST_CASE("consistency loss matches the independent evaluation") {
    SUBCASE("spec vector pair") {
        std::vector<std::vector<RelaxedPath>> groups{{path({1, 0}), path({0, 1})}};
        const double expect = std::pow(std::sqrt(0.5) - 0.2, 2.0);
        CHECK(consistency_loss(groups, 0.2).item() == doctest::Approx(expect).epsilon(1e-12));
        CHECK(consistency_loss(groups, 0.2).item() == doctest::Approx(0.2572).epsilon(1e-3));
    }
    SUBCASE("random configurations") {
        Rng rng(1);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::vector<std::vector<double>>> raw(3);
            std::vector<std::vector<RelaxedPath>> groups(3);
            for (int g = 0; g < 3; ++g)
                for (int m = 0; m < 4; ++m) {
                    std::vector<double> v(5);
                    for (double& e : v) e = rng.uniform();
                    raw[g].push_back(v);
                    groups[g].push_back(path(v));
                }
            const double mc = 0.1 * trial / 20.0 + 0.05;
            CHECK(consistency_loss(groups, mc).item() ==
                  doctest::Approx(brute_consistency(raw, mc)).epsilon(1e-10));
        }
    }
    SUBCASE("ragged groups rejected") {
        std::vector<std::vector<RelaxedPath>> groups{{path({1, 0}), path({0, 1})}, {path({1, 1})}};
        CHECK_THROWS_AS(consistency_loss(groups, 0.2), UsageError);
    }
}

TEST_CASE("consistency loss is invariant under within-group permutation") {
    Rng rng(2);
    std::vector<std::vector<double>> raw;
    for (int m = 0; m < 5; ++m) {
        std::vector<double> v(4);
        for (double& e : v) e = rng.uniform();
        raw.push_back(v);
    }
    std::vector<std::vector<RelaxedPath>> a{{}};
    for (const auto& v : raw) a[0].push_back(path(v));
    std::vector<std::vector<RelaxedPath>> b{{}};
    std::vector<std::size_t> order{3, 1, 4, 0, 2};
    for (std::size_t i : order) b[0].push_back(path(raw[i]));
    CHECK(consistency_loss(a, 0.15).item() ==
          doctest::Approx(consistency_loss(b, 0.15).item()).epsilon(1e-14));
}

TEST_CASE("diversity loss values") {
    auto center = [](std::vector<double> v) {
        const int n = static_cast<int>(v.size());
        return Tensor::from({n}, std::move(v));
    };
    SUBCASE("distant centers are free") {
        CHECK(diversity_loss({center({0, 0}), center({1, 0})}, 0.5).item() == 0.0);
    }
    SUBCASE("identical centers pay the full margin") {
        CHECK(diversity_loss({center({0.4, 0.4}), center({0.4, 0.4})}, 0.5).item() ==
              doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("spec example at distance 0.3") {
        CHECK(diversity_loss({center({0, 0}), center({0.3, 0})}, 0.5).item() ==
              doctest::Approx(0.04).epsilon(1e-12));
    }
    SUBCASE("single group returns zero with a warning") {
        CHECK(diversity_loss({center({0.1, 0.2})}, 0.5).item() == 0.0);
    }
    SUBCASE("random configurations against brute force") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::vector<double>> raw;
            std::vector<Tensor> centers;
            for (int i = 0; i < 4; ++i) {
                std::vector<double> v(6);
                for (double& e : v) e = rng.uniform();
                raw.push_back(v);
                centers.push_back(center(v));
            }
            CHECK(diversity_loss(centers, 0.5).item() ==
                  doctest::Approx(brute_diversity(raw, 0.5)).epsilon(1e-10));
        }
    }
    SUBCASE("invariant under group permutation") {
        std::vector<std::vector<double>> raw{{0.1, 0.2}, {0.3, 0.1}, {0.25, 0.3}};
        std::vector<Tensor> a, b;
        for (const auto& v : raw) a.push_back(center(v));
        for (std::size_t i : {2u, 0u, 1u}) b.push_back(center(raw[i]));
        CHECK(diversity_loss(a, 0.5).item() ==
              doctest::Approx(diversity_loss(b, 0.5).item()).epsilon(1e-14));
    }
}

TEST_CASE("cost loss") {
    SUBCASE("all-zero gates cost nothing") {
        CHECK(cost_loss(path({0, 0, 0}), {1, 2, 3}).item() == 0.0);
    }
    SUBCASE("all-one gates pay the full table") {
        CHECK(cost_loss(path({1, 1, 1}), {1, 2, 3}).item() == 6.0);
    }
    SUBCASE("dot-product oracle") {
        CHECK(cost_loss(path({0.5, 0, 1}), {1, 2, 3}).item() == doctest::Approx(3.5).epsilon(1e-15));
    }
    SUBCASE("linearity in the gates") {
        const std::vector<double> table{2, 5, 1, 4};
        const std::vector<double> v{0.2, 0.4, 0.1, 0.3};
        const double base = cost_loss(path(v), table).item();
        std::vector<double> scaled = v;
        for (double& e : scaled) e *= 2.0;
        CHECK(cost_loss(path(scaled), table).item() == doctest::Approx(2.0 * base).epsilon(1e-12));
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(cost_loss(path({0.5, 0.5}), {1, 2, 3}), ShapeError);
    }
}

TEST_CASE("total loss combination") {
    RegularizerConfig cfg;
    cfg.alpha = 0.2;
    cfg.beta = 0.2;
    cfg.gamma = 0.1;
    SUBCASE("degenerate weights reduce to cls") {
        RegularizerConfig zero;
        zero.alpha = zero.beta = zero.gamma = 0.0;
        TotalLoss t = total_loss(Tensor::scalar(1.7), Tensor::scalar(9), Tensor::scalar(9),
                                 Tensor::scalar(9), zero);
        CHECK(t.breakdown.total == 1.7);
    }
    SUBCASE("linear-combination oracle") {
        TotalLoss t = total_loss(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3),
                                 Tensor::scalar(4), cfg);
        CHECK(t.breakdown.total == doctest::Approx(2.4).epsilon(1e-15));
        CHECK(std::fabs(t.breakdown.total -
                        (t.breakdown.cls + cfg.alpha * t.breakdown.con + cfg.beta * t.breakdown.div +
                         cfg.gamma * t.breakdown.cost)) <= 1e-12);
    }
    SUBCASE("gamma scaling shifts the total by exactly gamma * cost") {
        RegularizerConfig doubled = cfg;
        doubled.gamma = 2.0 * cfg.gamma;
        TotalLoss a = total_loss(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3),
                                 Tensor::scalar(4), cfg);
        TotalLoss b = total_loss(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3),
                                 Tensor::scalar(4), doubled);
        CHECK(b.breakdown.total - a.breakdown.total ==
              doctest::Approx(cfg.gamma * 4.0).epsilon(1e-14));
    }
}

TEST_CASE("regularizer gradients match finite differences") {
    Rng rng(5);
    SUBCASE("consistency") {
        std::vector<std::vector<RelaxedPath>> groups(2);
        std::vector<Tensor> params;
        for (int g = 0; g < 2; ++g)
            for (int m = 0; m < 3; ++m) {
                std::vector<double> v(4);
                for (double& e : v) e = rng.uniform();
                groups[static_cast<std::size_t>(g)].push_back(path(v, true));
                params.push_back(groups[static_cast<std::size_t>(g)].back().values);
            }
        auto f = [&] { return consistency_loss(groups, 0.1); };
        CHECK(finite_diff_check(f, params) < 1e-4);
    }
    SUBCASE("diversity through the centers and the mean") {
        std::vector<std::vector<RelaxedPath>> groups(3);
        std::vector<Tensor> params;
        for (int g = 0; g < 3; ++g)
            for (int m = 0; m < 2; ++m) {
                std::vector<double> v(4);
                for (double& e : v) e = rng.uniform();
                groups[static_cast<std::size_t>(g)].push_back(path(v, true));
                params.push_back(groups[static_cast<std::size_t>(g)].back().values);
            }
        auto f = [&] {
            std::vector<Tensor> centers;
            for (const auto& g : groups) centers.push_back(group_center(g));
            return diversity_loss(centers, 0.6);
        };
        CHECK(finite_diff_check(f, params) < 1e-4);
    }
    SUBCASE("cost") {
        RelaxedPath p = path({0.2, 0.7, 0.4}, true);
        auto f = [&] { return cost_loss(p, {1.0, 2.0, 3.0}); };
        CHECK(finite_diff_check(f, {p.values}) < 1e-4);
    }
}

TEST_CASE("regularizers are non-negative on random inputs") {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::vector<RelaxedPath>> groups(2);
        std::vector<Tensor> centers;
        for (int g = 0; g < 2; ++g) {
            for (int m = 0; m < 3; ++m) {
                std::vector<double> v(5);
                for (double& e : v) e = rng.uniform();
                groups[static_cast<std::size_t>(g)].push_back(path(v));
            }
            centers.push_back(group_center(groups[static_cast<std::size_t>(g)]));
        }
        CHECK(consistency_loss(groups, 0.2).item() >= 0.0);
        CHECK(diversity_loss(centers, 0.5).item() >= 0.0);
    }
}
