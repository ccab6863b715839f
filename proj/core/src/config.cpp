#include "codinet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace codinet {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as a number");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int i = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as an integer");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        unsigned long long i = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(i);
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + v + "' as an unsigned integer");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": cannot parse '" + v + "' as a boolean");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

using Setter = std::function<void(Config&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& key_registry() {
    static const std::map<std::string, Setter> reg = {
        {"net.kind", [](Config& c, const std::string&, const std::string& v) {
             c.net.kind = block_kind_from_string(v);
         }},
        {"net.depth", [](Config& c, const std::string& k, const std::string& v) {
             c.net.depth = parse_int(k, v);
         }},
        {"net.width", [](Config& c, const std::string& k, const std::string& v) {
             c.net.channels = parse_int(k, v);
         }},
        {"net.in_channels", [](Config& c, const std::string& k, const std::string& v) {
             c.net.in_channels = parse_int(k, v);
         }},
        {"net.image_size", [](Config& c, const std::string& k, const std::string& v) {
             c.net.in_height = c.net.in_width = parse_int(k, v);
         }},
        {"net.num_classes", [](Config& c, const std::string& k, const std::string& v) {
             c.net.num_classes = parse_int(k, v);
         }},
        {"router.hidden_dim", [](Config& c, const std::string& k, const std::string& v) {
             c.net.router_hidden = parse_int(k, v);
         }},
        {"gumbel.temperature", [](Config& c, const std::string& k, const std::string& v) {
             c.gumbel.temperature = parse_double(k, v);
         }},
        {"gumbel.variant", [](Config& c, const std::string&, const std::string& v) {
             c.gumbel.variant = gumbel_variant_from_string(v);
         }},
        {"gumbel.inference_noise", [](Config& c, const std::string& k, const std::string& v) {
             c.gumbel.inference_noise = parse_bool(k, v);
         }},
        {"loss.alpha", [](Config& c, const std::string& k, const std::string& v) {
             c.train.reg.alpha = parse_double(k, v);
         }},
        {"loss.beta", [](Config& c, const std::string& k, const std::string& v) {
             c.train.reg.beta = parse_double(k, v);
         }},
        {"loss.gamma", [](Config& c, const std::string& k, const std::string& v) {
             c.train.reg.gamma = parse_double(k, v);
         }},
        {"loss.margin_consistency", [](Config& c, const std::string& k, const std::string& v) {
             c.train.reg.margin_consistency = parse_double(k, v);
         }},
        {"loss.margin_diversity", [](Config& c, const std::string& k, const std::string& v) {
             c.train.reg.margin_diversity = parse_double(k, v);
         }},
        {"train.lr", [](Config& c, const std::string& k, const std::string& v) {
             c.train.lr = parse_double(k, v);
         }},
        {"train.milestones", [](Config& c, const std::string& k, const std::string& v) {
             c.train.milestones = parse_int_list(k, v);
         }},
        {"train.momentum", [](Config& c, const std::string& k, const std::string& v) {
             c.train.momentum = parse_double(k, v);
         }},
        {"train.weight_decay", [](Config& c, const std::string& k, const std::string& v) {
             c.train.weight_decay = parse_double(k, v);
         }},
        {"train.epochs_stage1", [](Config& c, const std::string& k, const std::string& v) {
             c.train.epochs_stage1 = parse_int(k, v);
         }},
        {"train.epochs_stage2", [](Config& c, const std::string& k, const std::string& v) {
             c.train.epochs_stage2 = parse_int(k, v);
         }},
        {"train.batch_groups", [](Config& c, const std::string& k, const std::string& v) {
             c.train.batch.groups = parse_int(k, v);
         }},
        {"train.batch_augments", [](Config& c, const std::string& k, const std::string& v) {
             c.train.batch.augments_per_group = parse_int(k, v);
         }},
        {"train.seed", [](Config& c, const std::string& k, const std::string& v) {
             c.train.seed = parse_u64(k, v);
         }},
        {"train.precision", [](Config& c, const std::string& k, const std::string& v) {
             if (v == "float64") c.train.quantize_float32 = false;
             else if (v == "float32") c.train.quantize_float32 = true;
             else throw ConfigError(k + ": expected float32 or float64, got '" + v + "'");
         }},
        {"data.source", [](Config& c, const std::string& k, const std::string& v) {
             if (v == "synthetic") c.data.source = DataSource::Synthetic;
             else if (v == "cifar10") c.data.source = DataSource::Cifar10;
             else throw ConfigError(k + ": expected synthetic or cifar10, got '" + v + "'");
         }},
        {"data.root", [](Config& c, const std::string&, const std::string& v) {
             c.data.root = v;
         }},
        {"data.synthetic_classes", [](Config& c, const std::string& k, const std::string& v) {
             c.data.synthetic_classes = parse_int(k, v);
         }},
        {"data.synthetic_per_class", [](Config& c, const std::string& k, const std::string& v) {
             c.data.synthetic_per_class = parse_int(k, v);
         }},
        {"data.synthetic_val_per_class", [](Config& c, const std::string& k, const std::string& v) {
             c.data.synthetic_val_per_class = parse_int(k, v);
         }},
        {"data.synthetic_noise", [](Config& c, const std::string& k, const std::string& v) {
             c.data.synthetic_noise = parse_double(k, v);
         }},
        {"data.mean", [](Config& c, const std::string& k, const std::string& v) {
             c.train.mean = parse_double_list(k, v);
         }},
        {"data.std", [](Config& c, const std::string& k, const std::string& v) {
             c.train.std_dev = parse_double_list(k, v);
         }},
        {"data.pad", [](Config& c, const std::string& k, const std::string& v) {
             c.train.aug.pad = parse_int(k, v);
         }},
        {"data.flip", [](Config& c, const std::string& k, const std::string& v) {
             c.train.aug.flip = parse_bool(k, v);
         }},
        {"data.eval_augment", [](Config& c, const std::string& k, const std::string& v) {
             if (v == "none") c.data.eval_augment = EvalAugment::None;
             else if (v == "probe") c.data.eval_augment = EvalAugment::Probe;
             else throw ConfigError(k + ": expected none or probe, got '" + v + "'");
         }},
    };
    return reg;
}

void apply_key(Config& cfg, const std::string& key, const std::string& value) {
    auto it = key_registry().find(key);
    if (it == key_registry().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

void apply_line(Config& cfg, const std::string& raw, const std::string& where) {
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError(where + ": expected 'key = value', got '" + trim(raw) + "'");
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

} // namespace

Config default_config() {
    Config cfg;
    cfg.train.mean = {0.5};
    cfg.train.std_dev = {0.5};
    return cfg;
}

void Config::validate() const {
    if (net.depth < 1) throw ConfigError("net.depth: must be >= 1");
    if (net.channels < 1) throw ConfigError("net.width: must be >= 1");
    if (net.in_channels < 1) throw ConfigError("net.in_channels: must be >= 1");
    if (net.in_height < 1 || net.in_width < 1) throw ConfigError("net.image_size: must be >= 1");
    if (net.num_classes < 2) throw ConfigError("net.num_classes: must be >= 2");
    if (net.router_hidden < 1) throw ConfigError("router.hidden_dim: must be >= 1");
    if (gumbel.temperature <= 0.0) throw ConfigError("gumbel.temperature: must be > 0");
    if (train.reg.alpha < 0.0) throw ConfigError("loss.alpha: must be >= 0");
    if (train.reg.beta < 0.0) throw ConfigError("loss.beta: must be >= 0");
    if (train.reg.gamma < 0.0) throw ConfigError("loss.gamma: must be >= 0");
    if (train.reg.margin_consistency < 0.0)
        throw ConfigError("loss.margin_consistency: must be >= 0");
    if (train.reg.margin_diversity < 0.0) throw ConfigError("loss.margin_diversity: must be >= 0");
    if (train.lr <= 0.0) throw ConfigError("train.lr: must be > 0");
    if (train.momentum < 0.0 || train.momentum >= 1.0)
        throw ConfigError("train.momentum: must be in [0,1)");
    if (train.weight_decay < 0.0) throw ConfigError("train.weight_decay: must be >= 0");
    if (train.epochs_stage1 < 0 || train.epochs_stage2 < 0)
        throw ConfigError("train.epochs_stage1/2: must be >= 0");
    for (std::size_t i = 1; i < train.milestones.size(); ++i)
        if (train.milestones[i] <= train.milestones[i - 1])
            throw ConfigError("train.milestones: must be strictly increasing");
    if (train.batch.groups < 1) throw ConfigError("train.batch_groups: must be >= 1");
    if (train.batch.augments_per_group < 1) throw ConfigError("train.batch_augments: must be >= 1");
    if (train.aug.pad < 0) throw ConfigError("data.pad: must be >= 0");
    if (train.mean.size() != static_cast<std::size_t>(net.in_channels) ||
        train.std_dev.size() != static_cast<std::size_t>(net.in_channels))
        throw ConfigError("data.mean/data.std: must list one value per input channel");
    for (double s : train.std_dev)
        if (s <= 0.0) throw ConfigError("data.std: entries must be > 0");
    if (data.synthetic_classes < 1 || data.synthetic_classes > 16)
        throw ConfigError("data.synthetic_classes: must be in [1,16]");
    if (data.synthetic_per_class < 0 || data.synthetic_val_per_class < 0)
        throw ConfigError("data.synthetic_per_class/val_per_class: must be >= 0");
    if (data.synthetic_noise < 0.0) throw ConfigError("data.synthetic_noise: must be >= 0");
}

std::string Config::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "net.kind = " << to_string(net.kind) << "\n";
    os << "net.depth = " << net.depth << "\n";
    os << "net.width = " << net.channels << "\n";
    os << "net.in_channels = " << net.in_channels << "\n";
    os << "net.image_size = " << net.in_height << "\n";
    os << "net.num_classes = " << net.num_classes << "\n";
    os << "router.hidden_dim = " << net.router_hidden << "\n";
    os << "gumbel.temperature = " << gumbel.temperature << "\n";
    os << "gumbel.variant = " << to_string(gumbel.variant) << "\n";
    os << "gumbel.inference_noise = " << (gumbel.inference_noise ? "true" : "false") << "\n";
    os << "loss.alpha = " << train.reg.alpha << "\n";
    os << "loss.beta = " << train.reg.beta << "\n";
    os << "loss.gamma = " << train.reg.gamma << "\n";
    os << "loss.margin_consistency = " << train.reg.margin_consistency << "\n";
    os << "loss.margin_diversity = " << train.reg.margin_diversity << "\n";
    os << "train.lr = " << train.lr << "\n";
    os << "train.milestones = ";
    for (std::size_t i = 0; i < train.milestones.size(); ++i)
        os << (i ? "," : "") << train.milestones[i];
    os << "\n";
    os << "train.momentum = " << train.momentum << "\n";
    os << "train.weight_decay = " << train.weight_decay << "\n";
    os << "train.epochs_stage1 = " << train.epochs_stage1 << "\n";
    os << "train.epochs_stage2 = " << train.epochs_stage2 << "\n";
    os << "train.batch_groups = " << train.batch.groups << "\n";
    os << "train.batch_augments = " << train.batch.augments_per_group << "\n";
    os << "train.seed = " << train.seed << "\n";
    os << "train.precision = " << (train.quantize_float32 ? "float32" : "float64") << "\n";
    os << "data.source = " << (data.source == DataSource::Synthetic ? "synthetic" : "cifar10")
       << "\n";
    os << "data.root = " << data.root << "\n";
    os << "data.synthetic_classes = " << data.synthetic_classes << "\n";
    os << "data.synthetic_per_class = " << data.synthetic_per_class << "\n";
    os << "data.synthetic_val_per_class = " << data.synthetic_val_per_class << "\n";
    os << "data.synthetic_noise = " << data.synthetic_noise << "\n";
    os << "data.mean = ";
    for (std::size_t i = 0; i < train.mean.size(); ++i) os << (i ? "," : "") << train.mean[i];
    os << "\n";
    os << "data.std = ";
    for (std::size_t i = 0; i < train.std_dev.size(); ++i) os << (i ? "," : "") << train.std_dev[i];
    os << "\n";
    os << "data.pad = " << train.aug.pad << "\n";
    os << "data.flip = " << (train.aug.flip ? "true" : "false") << "\n";
    os << "data.eval_augment = " << (data.eval_augment == EvalAugment::Probe ? "probe" : "none")
       << "\n";
    return os.str();
}

Config parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    Config cfg = default_config();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        apply_line(cfg, line, "line " + std::to_string(lineno));
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + ov + "'");
        std::string key = trim(ov.substr(0, eq));
        std::string value = trim(ov.substr(eq + 1));
        apply_key(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

Config parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config_text(text, overrides);
}

} // namespace codinet
