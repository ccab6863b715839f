#pragma once

#include <string>
#include <vector>

#include "codinet/net.hpp"
#include "codinet/training.hpp"

namespace codinet {

enum class DataSource { Synthetic, Cifar10 };
enum class EvalAugment { None, Probe };

struct DataConfig {
    DataSource source = DataSource::Synthetic;
    std::string root = ".";
    int synthetic_classes = 8;
    int synthetic_per_class = 32;
    int synthetic_val_per_class = 8;
    double synthetic_noise = 0.05;
    EvalAugment eval_augment = EvalAugment::None;
};

/// Validated configuration for every subcommand. Parsed from line-oriented
/// `key = value` files with dotted section prefixes; unknown keys are
/// rejected and CLI --set overrides win over file values.
struct Config {
    NetSpec net;
    GumbelConfig gumbel;
    TrainConfig train;
    DataConfig data;

    void validate() const;
    /// Canonical `key = value` rendering (used for checkpoint snapshots).
    std::string to_text() const;
};

/// Defaults only.
Config default_config();

/// Parse `path` (empty string means no file) then apply `overrides`, each
/// "key=value". Throws ConfigError on unknown keys or constraint
/// violations.
Config parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Parse from in-memory text (one key = value per line, '#' comments).
Config parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

} // namespace codinet
