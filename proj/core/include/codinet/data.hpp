#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codinet/rng.hpp"
#include "codinet/tensor.hpp"

namespace codinet {

/// One image with a stable id; pixel values live in [0,1] until
/// normalization.
struct Sample {
    std::int64_t id = 0;
    Tensor image; // [C,H,W]
    int label = 0;
};

struct BatchSpec {
    int groups = 8;             // L source samples per batch
    int augments_per_group = 4; // M augmentations per sample

    int batch_size() const { return groups * augments_per_group; }
};

/// L*M samples in group-major order; all members of a group share the
/// source sample's id and label.
struct GroupedBatch {
    std::vector<Sample> items;
    std::vector<int> group_of; // item index -> group index
};

/// CIFAR-10 binary records: 1 label byte + 3072 pixel bytes (R,G,B planes,
/// row-major 32x32). Pixels are scaled to [0,1]; ids follow record order.
std::vector<Sample> load_cifar10_binary(const std::string& path);
/// Inverse of the loader, for fixtures and round-trip checks.
void write_cifar10_binary(const std::vector<Sample>& samples, const std::string& path);

/// Class-conditional Gaussian-blob images: class k places a blob at one of
/// four grid positions with a class-dependent intensity, plus pixel noise.
/// Supports up to 16 classes (4 positions x 4 intensity levels).
std::vector<Sample> synthetic_dataset(int num_classes, int per_class, int channels, int height,
                                      int width, double noise, Rng rng);

// Deterministic augmentation primitives.
Tensor pad_zero(const Tensor& image, int pad);
Tensor crop(const Tensor& image, int offset_y, int offset_x, int out_h, int out_w);
Tensor hflip(const Tensor& image);
Tensor vflip(const Tensor& image);
/// Quarter-turn rotations; k counts 90-degree steps counter-clockwise.
Tensor rot90(const Tensor& image, int k);

struct AugmentConfig {
    int pad = 4;
    bool flip = true; // horizontal flip with probability 0.5
};

/// Training-time augmentation: zero-pad, uniform-random crop back to the
/// original extent, then optional horizontal flip. Requires H == W.
Sample augment(const Sample& s, const AugmentConfig& cfg, Rng& rng);

enum class ProbeAugment { Crop, HFlip, VFlip, Rotate };

/// Evaluation-time probe augmentation: one transform drawn uniformly from
/// {crop, hflip, vflip, rot90}; never used during training.
Sample probe_augment(const Sample& s, Rng& rng);

/// L distinct source samples drawn without replacement from the pool, each
/// expanded to M augmentations.
GroupedBatch build_grouped_batch(const std::vector<Sample>& pool, const BatchSpec& spec,
                                 const AugmentConfig& aug, Rng& rng);

/// (pixel - mean[c]) / std[c] per channel, into a fresh tensor.
Tensor normalize(const Tensor& image, const std::vector<double>& mean,
                 const std::vector<double>& std_dev);

} // namespace codinet
