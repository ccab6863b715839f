#include <doctest.h>

#include <chrono>
#include <cmath>
#include <unordered_set>

#include "codinet/net.hpp"

using namespace codinet;

namespace {

NetSpec small_dense_spec(int depth = 3) {
    NetSpec s;
    s.kind = BlockKind::DenseResidual;
    s.depth = depth;
    s.channels = 6;
    s.in_channels = 1;
    s.in_height = 4;
    s.in_width = 4;
    s.num_classes = 3;
    s.router_hidden = 3;
    return s;
}

Tensor random_image(const NetSpec& s, std::uint64_t seed) {
    std::vector<double> v(static_cast<std::size_t>(s.in_channels) * s.in_height * s.in_width);
    Rng r(seed);
    for (double& e : v) e = r.uniform();
    return Tensor::from({s.in_channels, s.in_height, s.in_width}, std::move(v));
}

// Static reference: stem, every block, head.
Tensor static_forward(DynamicNet& net, const Tensor& x) {
    Tensor a = stem_forward(net.stem_head(), x);
    for (BlockParams& b : net.blocks()) a = block_forward(b, a);
    return head_forward(net.stem_head(), a);
}

} // namespace

TEST_CASE("relaxed forward at the full-execution limit") {
    Rng rng(1);
    NetSpec spec = small_dense_spec();
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Tensor x = random_image(spec, 3);
    Rng fwd_rng(10, streams::kGumbel);
    auto res = forward_relaxed(net, x, fwd_rng, std::vector<double>(3, 1.0));
    Tensor expect = static_forward(net, x);
    for (std::size_t i = 0; i < expect.value().size(); ++i)
        CHECK(res.logits.value()[i] == doctest::Approx(expect.value()[i]).epsilon(1e-15));
}

TEST_CASE("relaxed forward at the full-skip limit") {
    Rng rng(2);
    NetSpec spec = small_dense_spec();
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Tensor x = random_image(spec, 4);
    Rng fwd_rng(10, streams::kGumbel);
    auto res = forward_relaxed(net, x, fwd_rng, std::vector<double>(3, 0.0));
    Tensor expect = head_forward(net.stem_head(), stem_forward(net.stem_head(), x));
    for (std::size_t i = 0; i < expect.value().size(); ++i)
        CHECK(res.logits.value()[i] == doctest::Approx(expect.value()[i]).epsilon(1e-15));
}

TEST_CASE("forced binary gates agree with forward_binary") {
    Rng rng(3);
    NetSpec spec = small_dense_spec(4);
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Tensor x = random_image(spec, 5);

    const std::vector<std::vector<double>> patterns = {
        {1, 0, 1, 0}, {0, 1, 1, 0}, {1, 1, 1, 1}, {0, 0, 0, 0}};
    for (const auto& p : patterns) {
        std::vector<bool> run_bits;
        for (double v : p) run_bits.push_back(v >= 0.5);
        for (std::size_t k = 0; k < run_bits.size(); ++k)
            force_router_bias(net.routers()[k], run_bits[k]);

        Rng fwd_rng(10, streams::kGumbel);
        auto relaxed = forward_relaxed(net, x, fwd_rng, p);
        auto binary = forward_binary(net, x);
        REQUIRE(binary.path.bits.size() == p.size());
        for (std::size_t k = 0; k < p.size(); ++k)
            CHECK(binary.path.bits[k] == (p[k] >= 0.5 ? 1 : 0));
        for (std::size_t i = 0; i < relaxed.logits.value().size(); ++i)
            CHECK(std::fabs(relaxed.logits.value()[i] - binary.logits.value()[i]) <= 1e-12);
    }
}

TEST_CASE("forward_binary honours bias-forced routing") {
    Rng rng(4);
    NetSpec spec = small_dense_spec(3);
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Tensor x = random_image(spec, 6);
    const auto& costs = net.cost_table().entries;

    SUBCASE("all-run") {
        for (auto& r : net.routers()) force_router_bias(r, true);
        net.reset_block_evals();
        auto res = forward_binary(net, x);
        CHECK(res.path.to_string() == "111");
        CHECK(res.cost_maccs == costs[0] + costs[1] + costs[2]);
        CHECK(res.blocks_executed == 3);
        CHECK(net.block_evals() == 3);
    }
    SUBCASE("all-skip leaves the block counter untouched") {
        for (auto& r : net.routers()) force_router_bias(r, false);
        net.reset_block_evals();
        auto res = forward_binary(net, x);
        CHECK(res.path.to_string() == "000");
        CHECK(res.cost_maccs == 0.0);
        CHECK(res.blocks_executed == 0);
        CHECK(net.block_evals() == 0);
    }
    SUBCASE("run, skip, run") {
        force_router_bias(net.routers()[0], true);
        force_router_bias(net.routers()[1], false);
        force_router_bias(net.routers()[2], true);
        auto res = forward_binary(net, x);
        CHECK(res.path.to_string() == "101");
        CHECK(res.cost_maccs == costs[0] + costs[2]);
        CHECK(res.blocks_executed == res.path.popcount());
    }
}

TEST_CASE("block executions always equal the path popcount") {
    Rng rng(5);
    NetSpec spec = small_dense_spec(5);
    for (int trial = 0; trial < 25; ++trial) {
        Rng build_rng(100 + static_cast<std::uint64_t>(trial));
        DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, build_rng);
        // Random bias nudges make routing input-dependent but varied.
        for (auto& r : net.routers()) {
            r.b2.mutable_value()[0] = rng.normal();
            r.b2.mutable_value()[1] = rng.normal();
        }
        Tensor x = random_image(spec, 50 + static_cast<std::uint64_t>(trial));
        net.reset_block_evals();
        auto res = forward_binary(net, x);
        CHECK(static_cast<int>(net.block_evals()) == res.path.popcount());
        CHECK(res.blocks_executed == res.path.popcount());
    }
}

TEST_CASE("bias forcing enumerates the whole routing space") {
    NetSpec spec = small_dense_spec(6);
    spec.channels = 4;
    Rng rng(6);
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Tensor x = random_image(spec, 7);
    std::unordered_set<std::string> seen;
    for (int mask = 0; mask < (1 << 6); ++mask) {
        for (int k = 0; k < 6; ++k)
            force_router_bias(net.routers()[static_cast<std::size_t>(k)], (mask >> k) & 1);
        seen.insert(forward_binary(net, x).path.to_string());
    }
    CHECK(seen.size() == 64);
}

TEST_CASE("group_center") {
    auto path = [](std::vector<double> v) {
        const int n = static_cast<int>(v.size());
        RelaxedPath p;
        p.values = Tensor::from({n}, std::move(v));
        return p;
    };
    SUBCASE("idempotent on identical paths") {
        Tensor c = group_center({path({0.2, 0.9}), path({0.2, 0.9}), path({0.2, 0.9})});
        CHECK(c.value()[0] == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(c.value()[1] == doctest::Approx(0.9).epsilon(1e-15));
    }
    SUBCASE("symmetry") {
        Tensor c = group_center({path({1, 0}), path({0, 1})});
        CHECK(c.value()[0] == 0.5);
        CHECK(c.value()[1] == 0.5);
    }
    SUBCASE("plain mean") {
        Tensor c = group_center({path({0.2, 0.8}), path({0.4, 0.4}), path({0.6, 0.0})});
        CHECK(c.value()[0] == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(c.value()[1] == doctest::Approx(0.4).epsilon(1e-15));
    }
    SUBCASE("empty list rejected") { CHECK_THROWS_AS(group_center({}), UsageError); }
}

TEST_CASE("skipping reduces measured wall time") {
    // Conv blocks are heavy enough that 1000 all-skip forwards must not be
    // slower than 1000 all-run forwards.
    NetSpec spec;
    spec.kind = BlockKind::ConvResidual;
    spec.depth = 6;
    spec.channels = 8;
    spec.in_channels = 1;
    spec.in_height = 12;
    spec.in_width = 12;
    spec.num_classes = 4;
    spec.router_hidden = 2;
    Rng rng(8);
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Tensor x = random_image(spec, 9);

    auto time_runs = [&](bool run) {
        for (auto& r : net.routers()) force_router_bias(r, run);
        (void)forward_binary(net, x); // warm-up
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < 1000; ++i) (void)forward_binary(net, x);
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double t_all = time_runs(true);
    const double t_none = time_runs(false);
    CHECK(t_none <= t_all);
}

TEST_CASE("relaxed path values stay in the unit interval") {
    Rng rng(11);
    NetSpec spec = small_dense_spec(4);
    DynamicNet net = DynamicNet::build(spec, GumbelConfig{}, rng);
    Rng fwd_rng(12, streams::kGumbel);
    for (int trial = 0; trial < 40; ++trial) {
        auto res = forward_relaxed(net, random_image(spec, 200 + static_cast<std::uint64_t>(trial)),
                                   fwd_rng);
        for (double v : res.path.values.value()) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }
}
