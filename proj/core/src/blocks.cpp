#include "codinet/blocks.hpp"

#include <cmath>

namespace codinet {

namespace {

Tensor gaussian_init(Shape shape, int fan_in, Rng& rng, double gain = 1.0) {
    const double std_dev = gain * std::sqrt(2.0 / fan_in);
    std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
    for (double& x : v) x = std_dev * rng.normal();
    return Tensor::from(std::move(shape), std::move(v), true);
}

// Without normalization layers, residual variance compounds across blocks;
// a damped second layer keeps deep stacks stable at init.
constexpr double kResidualGain = 0.1;

void check_block_shape(const BlockShape& s) {
    if (s.channels <= 0 || s.height <= 0 || s.width <= 0)
        throw ShapeError("block shape extents must be positive");
    if (s.kind == BlockKind::DenseResidual && (s.height != 1 || s.width != 1))
        throw ShapeError("dense blocks carry activations as [D,1,1]");
}

} // namespace

BlockKind block_kind_from_string(const std::string& s) {
    if (s == "conv-residual") return BlockKind::ConvResidual;
    if (s == "dense-residual") return BlockKind::DenseResidual;
    throw ConfigError("unknown block kind '" + s + "' (conv-residual | dense-residual)");
}

std::string to_string(BlockKind kind) {
    return kind == BlockKind::ConvResidual ? "conv-residual" : "dense-residual";
}

BlockParams BlockParams::init(const BlockShape& shape, Rng& rng) {
    check_block_shape(shape);
    BlockParams p;
    p.shape = shape;
    const int c = shape.channels;
    if (shape.kind == BlockKind::ConvResidual) {
        p.w1 = gaussian_init({c, c, 3, 3}, c * 9, rng);
        p.w2 = gaussian_init({c, c, 3, 3}, c * 9, rng, kResidualGain);
        p.b1 = Tensor::zeros({c}, true);
        p.b2 = Tensor::zeros({c}, true);
    } else {
        p.w1 = gaussian_init({c, c}, c, rng);
        p.w2 = gaussian_init({c, c}, c, rng, kResidualGain);
        p.b1 = Tensor::zeros({c, 1}, true);
        p.b2 = Tensor::zeros({c, 1}, true);
    }
    return p;
}

std::vector<Tensor> BlockParams::parameters() { return {w1, b1, w2, b2}; }

std::int64_t BlockParams::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

Tensor block_forward(const BlockParams& block, const Tensor& a) {
    const BlockShape& s = block.shape;
    if (a.shape() != Shape{s.channels, s.height, s.width})
        throw ShapeError("block_forward: input " + shape_str(a.shape()) + " does not match block " +
                         shape_str({s.channels, s.height, s.width}));
    if (s.kind == BlockKind::ConvResidual) {
        Tensor h = relu(add_channel_bias(conv2d(a, block.w1), block.b1));
        Tensor f = add_channel_bias(conv2d(h, block.w2), block.b2);
        return add(a, f);
    }
    const int d = s.channels;
    Tensor x = reshape(a, {d, 1});
    Tensor h = relu(add(matmul(block.w1, x), block.b1));
    Tensor f = add(matmul(block.w2, h), block.b2);
    return add(a, reshape(f, {d, 1, 1}));
}

StemHead StemHead::init(BlockKind kind, int in_channels, int in_height, int in_width, int channels,
                        int num_classes, Rng& rng) {
    if (in_channels <= 0 || in_height <= 0 || in_width <= 0 || channels <= 0 || num_classes <= 0)
        throw ShapeError("stem/head extents must be positive");
    StemHead sh;
    sh.kind = kind;
    sh.in_channels = in_channels;
    sh.in_height = in_height;
    sh.in_width = in_width;
    sh.channels = channels;
    sh.num_classes = num_classes;
    if (kind == BlockKind::ConvResidual) {
        sh.stem_w = gaussian_init({channels, in_channels, 3, 3}, in_channels * 9, rng);
        sh.stem_b = Tensor::zeros({channels}, true);
    } else {
        const int flat = in_channels * in_height * in_width;
        sh.stem_w = gaussian_init({channels, flat}, flat, rng);
        sh.stem_b = Tensor::zeros({channels, 1}, true);
    }
    sh.head_w = gaussian_init({num_classes, channels}, channels, rng);
    sh.head_b = Tensor::zeros({num_classes, 1}, true);
    return sh;
}

std::vector<Tensor> StemHead::parameters() { return {stem_w, stem_b, head_w, head_b}; }

Tensor stem_forward(const StemHead& sh, const Tensor& image) {
    if (image.shape() != Shape{sh.in_channels, sh.in_height, sh.in_width})
        throw ShapeError("stem_forward: image " + shape_str(image.shape()) + " does not match stem input " +
                         shape_str({sh.in_channels, sh.in_height, sh.in_width}));
    if (sh.kind == BlockKind::ConvResidual)
        return relu(add_channel_bias(conv2d(image, sh.stem_w), sh.stem_b));
    Tensor flat = reshape(image, {sh.in_channels * sh.in_height * sh.in_width, 1});
    Tensor z = relu(add(matmul(sh.stem_w, flat), sh.stem_b));
    return reshape(z, {sh.channels, 1, 1});
}

Tensor head_forward(const StemHead& sh, const Tensor& features) {
    Tensor pooled = reshape(global_avg_pool(features), {sh.channels, 1});
    Tensor logits = add(matmul(sh.head_w, pooled), sh.head_b);
    return reshape(logits, {sh.num_classes});
}

double CostTable::total() const {
    double s = 0.0;
    for (double c : entries) s += c;
    return s;
}

std::vector<double> CostTable::normalized_fractions() const {
    std::vector<double> out(entries.size(), 0.0);
    const double t = total();
    if (t <= 0.0) return out;
    for (std::size_t i = 0; i < entries.size(); ++i) out[i] = entries[i] / t;
    return out;
}

double block_macc(const BlockShape& shape) {
    check_block_shape(shape);
    const double c = shape.channels;
    if (shape.kind == BlockKind::ConvResidual)
        return 2.0 * (static_cast<double>(shape.height) * shape.width * c * c * 9.0);
    return 2.0 * c * c;
}

CostTable build_cost_table(const std::vector<BlockShape>& gated_blocks) {
    CostTable t;
    t.entries.reserve(gated_blocks.size());
    for (const BlockShape& s : gated_blocks) t.entries.push_back(block_macc(s));
    return t;
}

} // namespace codinet
