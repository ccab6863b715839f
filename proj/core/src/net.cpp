#include "codinet/net.hpp"

#include <algorithm>
#include <utility>

namespace codinet {

int RoutingPath::popcount() const {
    int n = 0;
    for (auto b : bits) n += b ? 1 : 0;
    return n;
}

std::string RoutingPath::to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) s[i] = '1';
    return s;
}

RoutingPath RoutingPath::from_string(const std::string& s) {
    RoutingPath p;
    p.bits.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw DataError("routing path bitstring must be over {0,1}");
        p.bits.push_back(c == '1' ? 1 : 0);
    }
    return p;
}

DynamicNet::DynamicNet(DynamicNet&& other) noexcept
    : spec_(std::move(other.spec_)),
      gumbel_(other.gumbel_),
      stem_head_(std::move(other.stem_head_)),
      blocks_(std::move(other.blocks_)),
      routers_(std::move(other.routers_)),
      cost_table_(std::move(other.cost_table_)),
      block_evals_(other.block_evals_.load(std::memory_order_relaxed)) {}

DynamicNet& DynamicNet::operator=(DynamicNet&& other) noexcept {
    spec_ = std::move(other.spec_);
    gumbel_ = other.gumbel_;
    stem_head_ = std::move(other.stem_head_);
    blocks_ = std::move(other.blocks_);
    routers_ = std::move(other.routers_);
    cost_table_ = std::move(other.cost_table_);
    block_evals_.store(other.block_evals_.load(std::memory_order_relaxed),
                       std::memory_order_relaxed);
    return *this;
}

DynamicNet DynamicNet::build(const NetSpec& spec, const GumbelConfig& gumbel, Rng& rng) {
    if (spec.depth < 0) throw ConfigError("net depth must be non-negative");
    DynamicNet net;
    net.spec_ = spec;
    net.gumbel_ = gumbel;

    Rng init_rng = rng.fork(streams::kInit);
    net.stem_head_ = StemHead::init(spec.kind, spec.in_channels, spec.in_height, spec.in_width,
                                    spec.channels, spec.num_classes, init_rng);

    BlockShape bs;
    bs.kind = spec.kind;
    bs.channels = spec.channels;
    if (spec.kind == BlockKind::ConvResidual) {
        bs.height = spec.in_height;
        bs.width = spec.in_width;
    }
    std::vector<BlockShape> shapes(static_cast<std::size_t>(spec.depth), bs);

    net.blocks_.reserve(shapes.size());
    net.routers_.reserve(shapes.size());
    for (const BlockShape& s : shapes) {
        net.blocks_.push_back(BlockParams::init(s, init_rng));
        net.routers_.push_back(RouterParams::init(s.channels, spec.router_hidden, init_rng));
    }
    net.cost_table_ = build_cost_table(shapes);
    return net;
}

std::vector<Tensor> DynamicNet::parameters() {
    std::vector<Tensor> out = backbone_parameters();
    for (Tensor t : router_parameters()) out.push_back(t);
    return out;
}

std::vector<Tensor> DynamicNet::backbone_parameters() {
    std::vector<Tensor> out = stem_head_.parameters();
    for (BlockParams& b : blocks_)
        for (Tensor t : b.parameters()) out.push_back(t);
    return out;
}

std::vector<Tensor> DynamicNet::router_parameters() {
    std::vector<Tensor> out;
    for (RouterParams& r : routers_)
        for (Tensor t : r.parameters()) out.push_back(t);
    return out;
}

RelaxedForwardResult forward_relaxed(DynamicNet& net, const Tensor& x, Rng& rng,
                                     const std::optional<std::vector<double>>& forced_gates) {
    if (forced_gates && forced_gates->size() != static_cast<std::size_t>(net.depth()))
        throw ShapeError("forced_gates length must equal net depth");

    Tensor a = stem_forward(net.stem_head(), x);
    std::vector<Tensor> gates;
    gates.reserve(static_cast<std::size_t>(net.depth()));

    for (int k = 0; k < net.depth(); ++k) {
        Tensor v;
        if (forced_gates) {
            v = Tensor::scalar((*forced_gates)[static_cast<std::size_t>(k)]);
        } else {
            RouterTrace trace = router_forward(net.routers()[static_cast<std::size_t>(k)], a);
            v = gumbel_relax(trace, net.gumbel(), rng);
        }
        Tensor f = block_forward(net.blocks()[static_cast<std::size_t>(k)], a);
        a = add(scale_by(f, v), scale_by(a, one_minus(v)));
        gates.push_back(v);
    }

    RelaxedForwardResult out;
    out.logits = head_forward(net.stem_head(), a);
    out.path.values = stack_scalars(gates);
    return out;
}

BinaryForwardResult forward_binary(const DynamicNet& net, const Tensor& x, Rng* noise_rng) {
    GradPause pause; // inference never records
    const bool with_noise = net.gumbel().inference_noise && noise_rng != nullptr;
    BinaryForwardResult out;
    out.path.bits.reserve(static_cast<std::size_t>(net.depth()));
    out.relaxed.reserve(static_cast<std::size_t>(net.depth()));

    Tensor a = stem_forward(net.stem_head(), x);
    for (int k = 0; k < net.depth(); ++k) {
        RouterTrace trace = router_forward(net.routers()[static_cast<std::size_t>(k)], a);
        double v = trace.probs.value()[1]; // noiseless relaxed decision
        if (with_noise)
            v = gumbel_relax(trace, net.gumbel(), *noise_rng).item();
        const bool run = v >= 0.5; // == argmax with ties to run
        out.relaxed.push_back(v);
        out.path.bits.push_back(run ? 1 : 0);
        if (run) {
            a = block_forward(net.blocks()[static_cast<std::size_t>(k)], a);
            out.cost_maccs += net.cost_table().entries[static_cast<std::size_t>(k)];
            ++out.blocks_executed;
            net.count_block_eval();
        }
    }
    out.logits = head_forward(net.stem_head(), a);
    return out;
}

Tensor group_center(const std::vector<RelaxedPath>& paths) {
    if (paths.empty()) throw UsageError("group_center: empty path list");
    std::vector<Tensor> vals;
    vals.reserve(paths.size());
    for (const RelaxedPath& p : paths) vals.push_back(p.values);
    return mean_of(vals);
}

void force_router_bias(RouterParams& router, bool run, double strength) {
    auto b = router.b2.mutable_value();
    b[0] = run ? -strength : strength;
    b[1] = run ? strength : -strength;
    auto w = router.w2.mutable_value();
    std::fill(w.begin(), w.end(), 0.0);
}

} // namespace codinet
