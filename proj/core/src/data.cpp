#include "codinet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace codinet {

namespace {
constexpr int kCifarDim = 32;
constexpr int kCifarChannels = 3;
constexpr std::size_t kCifarRecord = 1 + kCifarChannels * kCifarDim * kCifarDim;
} // namespace

std::vector<Sample> load_cifar10_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CIFAR-10 file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() % kCifarRecord != 0)
        throw DataError("truncated CIFAR-10 file: " + path + " (" + std::to_string(bytes.size()) +
                        " bytes is not a multiple of " + std::to_string(kCifarRecord) + ")");
    const std::size_t count = bytes.size() / kCifarRecord;
    std::vector<Sample> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const unsigned char* rec = bytes.data() + r * kCifarRecord;
        const int label = rec[0];
        if (label > 9)
            throw DataError("CIFAR-10 record " + std::to_string(r) + " has label " +
                            std::to_string(label) + " > 9");
        std::vector<double> px(kCifarRecord - 1);
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = rec[1 + i] / 255.0;
        Sample s;
        s.id = static_cast<std::int64_t>(r);
        s.label = label;
        s.image = Tensor::from({kCifarChannels, kCifarDim, kCifarDim}, std::move(px));
        out.push_back(std::move(s));
    }
    return out;
}

void write_cifar10_binary(const std::vector<Sample>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write CIFAR-10 file: " + path);
    for (const Sample& s : samples) {
        if (s.image.shape() != Shape{kCifarChannels, kCifarDim, kCifarDim})
            throw DataError("write_cifar10_binary: sample is not 3x32x32");
        out.put(static_cast<char>(s.label));
        for (double v : s.image.value())
            out.put(static_cast<char>(static_cast<unsigned char>(std::llround(v * 255.0))));
    }
}

std::vector<Sample> synthetic_dataset(int num_classes, int per_class, int channels, int height,
                                      int width, double noise, Rng rng) {
    if (num_classes <= 0 || channels <= 0 || height <= 0 || width <= 0)
        throw DataError("synthetic_dataset: sizes must be positive");
    if (num_classes > 16)
        throw DataError("synthetic_dataset supports at most 16 classes");
    if (per_class < 0) throw DataError("synthetic_dataset: per_class must be >= 0");

    // Class signature = blob geometry, not position: classes 0-7 are
    // centered circular blobs of growing width, classes 8-15 their
    // vertically elongated counterparts. Geometry survives random crops
    // and horizontal flips (the blob is centered and mirror-symmetric),
    // and distinct widths are pattern differences rather than intensity
    // rescalings, so bias-free ReLU stacks can tell them apart.
    const double cy = (height - 1) / 2.0;
    const double cx = (width - 1) / 2.0;
    const double unit = std::min(height, width) / 16.0;

    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(num_classes) * per_class);
    std::int64_t next_id = 0;
    for (int k = 0; k < num_classes; ++k) {
        const double sigma = unit * (0.8 + 0.3 * (k % 8));
        const bool elongated = k >= 8;
        const double sy = elongated ? sigma * 1.8 : sigma;
        const double sx = elongated ? sigma * 0.6 : sigma;
        for (int i = 0; i < per_class; ++i) {
            Rng srng = rng.fork(static_cast<std::uint64_t>(next_id) + 1);
            std::vector<double> px(static_cast<std::size_t>(channels) * height * width);
            for (int c = 0; c < channels; ++c)
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x) {
                        const double dy = (y - cy) / sy;
                        const double dx = (x - cx) / sx;
                        double v = 0.9 * std::exp(-(dy * dy + dx * dx) / 2.0);
                        v += noise * srng.normal();
                        px[(static_cast<std::size_t>(c) * height + y) * width + x] =
                            std::clamp(v, 0.0, 1.0);
                    }
            Sample s;
            s.id = next_id++;
            s.label = k;
            s.image = Tensor::from({channels, height, width}, std::move(px));
            out.push_back(std::move(s));
        }
    }
    return out;
}

Tensor pad_zero(const Tensor& image, int pad) {
    if (image.shape().size() != 3) throw ShapeError("pad_zero expects [C,H,W]");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    const int ph = h + 2 * pad, pw = w + 2 * pad;
    std::vector<double> out(static_cast<std::size_t>(c) * ph * pw, 0.0);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<std::size_t>(ch) * ph + y + pad) * pw + x + pad] =
                    image.value()[(static_cast<std::size_t>(ch) * h + y) * w + x];
    return Tensor::from({c, ph, pw}, std::move(out));
}

Tensor crop(const Tensor& image, int offset_y, int offset_x, int out_h, int out_w) {
    if (image.shape().size() != 3) throw ShapeError("crop expects [C,H,W]");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    if (offset_y < 0 || offset_x < 0 || offset_y + out_h > h || offset_x + out_w > w)
        throw ShapeError("crop window exceeds image extent");
    std::vector<double> out(static_cast<std::size_t>(c) * out_h * out_w);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x)
                out[(static_cast<std::size_t>(ch) * out_h + y) * out_w + x] =
                    image.value()[(static_cast<std::size_t>(ch) * h + y + offset_y) * w + x + offset_x];
    return Tensor::from({c, out_h, out_w}, std::move(out));
}

Tensor hflip(const Tensor& image) {
    if (image.shape().size() != 3) throw ShapeError("hflip expects [C,H,W]");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::vector<double> out(image.value().begin(), image.value().end());
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<std::size_t>(ch) * h + y) * w + x] =
                    image.value()[(static_cast<std::size_t>(ch) * h + y) * w + (w - 1 - x)];
    return Tensor::from({c, h, w}, std::move(out));
}

Tensor vflip(const Tensor& image) {
    if (image.shape().size() != 3) throw ShapeError("vflip expects [C,H,W]");
    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::vector<double> out(image.value().begin(), image.value().end());
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<std::size_t>(ch) * h + y) * w + x] =
                    image.value()[(static_cast<std::size_t>(ch) * h + (h - 1 - y)) * w + x];
    return Tensor::from({c, h, w}, std::move(out));
}

Tensor rot90(const Tensor& image, int k) {
    if (image.shape().size() != 3) throw ShapeError("rot90 expects [C,H,W]");
    k = ((k % 4) + 4) % 4;
    Tensor cur = image;
    for (int step = 0; step < k; ++step) {
        const int c = cur.dim(0), h = cur.dim(1), w = cur.dim(2);
        std::vector<double> out(static_cast<std::size_t>(c) * w * h);
        // (y,x) -> (w-1-x, y) counter-clockwise
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    out[(static_cast<std::size_t>(ch) * w + (w - 1 - x)) * h + y] =
                        cur.value()[(static_cast<std::size_t>(ch) * h + y) * w + x];
        cur = Tensor::from({c, w, h}, std::move(out));
    }
    return cur;
}

Sample augment(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
    const int h = s.image.dim(1), w = s.image.dim(2);
    if (h != w) throw DataError("augment requires square images");
    Tensor padded = pad_zero(s.image, cfg.pad);
    const int oy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(2 * cfg.pad + 1)));
    const int ox = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(2 * cfg.pad + 1)));
    Tensor img = crop(padded, oy, ox, h, w);
    if (cfg.flip && rng.bernoulli(0.5)) img = hflip(img);
    Sample out = s;
    out.image = img;
    return out;
}

Sample probe_augment(const Sample& s, Rng& rng) {
    Sample out = s;
    switch (static_cast<ProbeAugment>(rng.uniform_index(4))) {
    case ProbeAugment::Crop: {
        AugmentConfig cfg;
        cfg.flip = false;
        return augment(s, cfg, rng);
    }
    case ProbeAugment::HFlip:
        out.image = hflip(s.image);
        return out;
    case ProbeAugment::VFlip:
        out.image = vflip(s.image);
        return out;
    case ProbeAugment::Rotate:
        out.image = rot90(s.image, 1 + static_cast<int>(rng.uniform_index(3)));
        return out;
    }
    return out; // unreachable
}

GroupedBatch build_grouped_batch(const std::vector<Sample>& pool, const BatchSpec& spec,
                                 const AugmentConfig& aug, Rng& rng) {
    if (spec.groups < 1 || spec.augments_per_group < 1)
        throw DataError("batch spec requires L >= 1 and M >= 1");
    if (pool.size() < static_cast<std::size_t>(spec.groups))
        throw DataError("pool of " + std::to_string(pool.size()) + " samples cannot supply L=" +
                        std::to_string(spec.groups) + " distinct sources");

    // Partial Fisher-Yates over an index vector picks L distinct sources.
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int g = 0; g < spec.groups; ++g) {
        const std::size_t j =
            g + static_cast<std::size_t>(rng.uniform_index(idx.size() - static_cast<std::size_t>(g)));
        std::swap(idx[static_cast<std::size_t>(g)], idx[j]);
    }

    GroupedBatch out;
    out.items.reserve(static_cast<std::size_t>(spec.batch_size()));
    out.group_of.reserve(static_cast<std::size_t>(spec.batch_size()));
    for (int g = 0; g < spec.groups; ++g) {
        const Sample& src = pool[idx[static_cast<std::size_t>(g)]];
        for (int m = 0; m < spec.augments_per_group; ++m) {
            out.items.push_back(augment(src, aug, rng));
            out.group_of.push_back(g);
        }
    }
    return out;
}

Tensor normalize(const Tensor& image, const std::vector<double>& mean,
                 const std::vector<double>& std_dev) {
    if (image.shape().size() != 3) throw ShapeError("normalize expects [C,H,W]");
    const int c = image.dim(0);
    if (mean.size() != static_cast<std::size_t>(c) || std_dev.size() != static_cast<std::size_t>(c))
        throw ConfigError("normalize: mean/std must list one value per channel");
    const int hw = image.dim(1) * image.dim(2);
    std::vector<double> out(image.value().begin(), image.value().end());
    for (int ch = 0; ch < c; ++ch) {
        if (std_dev[static_cast<std::size_t>(ch)] <= 0.0)
            throw ConfigError("normalize: std must be positive");
        const double m = mean[static_cast<std::size_t>(ch)];
        const double inv = 1.0 / std_dev[static_cast<std::size_t>(ch)];
        for (int i = 0; i < hw; ++i) out[static_cast<std::size_t>(ch) * hw + i] =
            (out[static_cast<std::size_t>(ch) * hw + i] - m) * inv;
    }
    return Tensor::from(image.shape(), std::move(out));
}

} // namespace codinet
