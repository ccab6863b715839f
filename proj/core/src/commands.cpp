#include "codinet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace codinet {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

json epoch_to_json(const EpochStats& e) {
    // wall_seconds is intentionally absent: metrics files are byte-stable
    // across reruns of the same config.
    json j;
    j["epoch"] = e.epoch;
    j["stage"] = e.stage;
    j["lr"] = e.lr;
    j["loss_cls"] = e.losses.cls;
    j["loss_con"] = e.losses.con;
    j["loss_div"] = e.losses.div;
    j["loss_cost"] = e.losses.cost;
    j["loss_total"] = e.losses.total;
    j["train_acc"] = e.train_acc;
    j["val_acc"] = e.val_acc;
    j["mean_gates"] = e.mean_gates;
    j["mean_binary_cost_gmaccs"] = e.mean_binary_cost_gmaccs;
    return j;
}

PathLog collect_path_log(const DynamicNet& net, const std::vector<Sample>& samples,
                         const TrainConfig& tc) {
    PathLog log;
    log.depth = net.depth();
    log.num_classes = net.spec().num_classes;
    log.records.reserve(samples.size());
    for (const Sample& s : samples) {
        BinaryForwardResult fwd = forward_binary(net, normalize(s.image, tc.mean, tc.std_dev));
        PathRecord rec;
        rec.id = s.id;
        rec.label = s.label;
        rec.path = fwd.path;
        rec.relaxed = fwd.relaxed;
        rec.cost_maccs = fwd.cost_maccs;
        Tensor pred = softmax(fwd.logits);
        rec.prediction.assign(pred.value().begin(), pred.value().end());
        log.records.push_back(std::move(rec));
    }
    return log;
}

json log_summary_json(const PathLog& log, const CostTable& table) {
    CostReport cr = cost_report(log, table);
    json j;
    j["records"] = log.records.size();
    j["unique_paths"] = log.records.empty() ? 0 : unique_path_count(log);
    j["mean_gmaccs"] = cr.mean_gmaccs;
    j["full_gmaccs"] = cr.full_gmaccs;
    j["speedup"] = std::isfinite(cr.speedup) ? json(cr.speedup) : json("inf");

    // Histogram of expected run counts, one bucket per integer.
    std::vector<int> hist(static_cast<std::size_t>(log.depth) + 1, 0);
    for (const PathRecord& r : log.records) {
        const int bucket = std::min<int>(log.depth, static_cast<int>(expected_run_count(r.relaxed)));
        ++hist[static_cast<std::size_t>(bucket)];
    }
    j["expected_run_count_histogram"] = hist;
    return j;
}

} // namespace

std::string resolve_out_dir(const std::string& requested) {
    if (const char* env = std::getenv("CODINET_OUT"); env != nullptr && *env != '\0')
        return env;
    if (!requested.empty()) return requested;
    return "out";
}

DatasetSplits load_dataset(const Config& cfg) {
    DatasetSplits splits;
    if (cfg.data.source == DataSource::Synthetic) {
        Rng rng(cfg.train.seed, streams::kData);
        splits.train = synthetic_dataset(cfg.data.synthetic_classes, cfg.data.synthetic_per_class,
                                         cfg.net.in_channels, cfg.net.in_height, cfg.net.in_width,
                                         cfg.data.synthetic_noise, rng.fork(1));
        splits.eval = synthetic_dataset(cfg.data.synthetic_classes, cfg.data.synthetic_val_per_class,
                                        cfg.net.in_channels, cfg.net.in_height, cfg.net.in_width,
                                        cfg.data.synthetic_noise, rng.fork(2));
        // Keep ids disjoint between the splits.
        for (Sample& s : splits.eval) s.id += 1000000;
        return splits;
    }
    const fs::path root(cfg.data.root);
    if (fs::exists(root / "data_batch_1.bin")) {
        for (int b = 1; b <= 5; ++b) {
            const fs::path p = root / ("data_batch_" + std::to_string(b) + ".bin");
            if (!fs::exists(p)) break;
            auto part = load_cifar10_binary(p.string());
            const std::int64_t base = static_cast<std::int64_t>(splits.train.size());
            for (Sample& s : part) s.id += base;
            splits.train.insert(splits.train.end(), part.begin(), part.end());
        }
        splits.eval = load_cifar10_binary((root / "test_batch.bin").string());
    } else {
        splits.train = load_cifar10_binary((root / "train.bin").string());
        splits.eval = load_cifar10_binary((root / "test.bin").string());
    }
    for (Sample& s : splits.eval) s.id += 1000000;
    return splits;
}

TrainArtifacts cmd_train(const Config& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    DatasetSplits data = load_dataset(cfg);

    Rng rng(cfg.train.seed);
    DynamicNet net = DynamicNet::build(cfg.net, cfg.gumbel, rng);
    if (cfg.train.quantize_float32) quantize_parameters_float32(net.parameters());

    TrainArtifacts art;
    art.stage1 = train_stage1(net, data.train, data.eval, cfg.train);
    art.stage2 = finetune_stage2(net, data.train, data.eval, cfg.train, cfg.train.epochs_stage1);

    art.metrics_path = (fs::path(out_dir) / "metrics.jsonl").string();
    {
        std::ofstream metrics(art.metrics_path);
        if (!metrics) throw IoError("cannot write metrics file: " + art.metrics_path);
        for (const EpochStats& e : art.stage1.epochs) metrics << epoch_to_json(e).dump() << "\n";
        for (const EpochStats& e : art.stage2.epochs) metrics << epoch_to_json(e).dump() << "\n";
    }

    art.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
    save_checkpoint(art.checkpoint_path, net, cfg,
                    static_cast<std::uint64_t>(cfg.train.epochs_stage1 + cfg.train.epochs_stage2));

    art.final_eval = evaluate_binary(net, data.eval, cfg.train.mean, cfg.train.std_dev);
    PathLog log = collect_path_log(net, data.eval, cfg.train);
    art.unique_paths = log.records.empty() ? 0 : unique_path_count(log);

    art.summary_path = (fs::path(out_dir) / "summary.json").string();
    {
        json j = log_summary_json(log, net.cost_table());
        j["accuracy"] = art.final_eval.accuracy;
        j["epochs_stage1"] = cfg.train.epochs_stage1;
        j["epochs_stage2"] = cfg.train.epochs_stage2;
        j["wall_seconds"] = art.stage1.total_wall_seconds + art.stage2.total_wall_seconds;
        std::ofstream out(art.summary_path);
        out << j.dump(2) << "\n";
    }
    return art;
}

EvalArtifacts cmd_eval(const Config& cfg, const std::string& checkpoint_path,
                       const std::string& out_dir) {
    ensure_dir(out_dir);
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);

    // The checkpoint's net section is authoritative; a conflicting net
    // section in the live config is a mistake worth failing on.
    const NetSpec& a = cfg.net;
    const NetSpec& b = loaded.meta.config.net;
    if (a.kind != b.kind || a.depth != b.depth || a.channels != b.channels ||
        a.in_channels != b.in_channels || a.in_height != b.in_height || a.in_width != b.in_width ||
        a.num_classes != b.num_classes || a.router_hidden != b.router_hidden)
        throw ConfigError("config net section does not match the checkpoint's net");

    Config eval_cfg = cfg;
    DatasetSplits data = load_dataset(eval_cfg);

    std::vector<Sample> eval_set = data.eval;
    if (cfg.data.eval_augment == EvalAugment::Probe) {
        Rng rng(cfg.train.seed, streams::kProbe);
        for (Sample& s : eval_set) {
            Rng srng = rng.fork(static_cast<std::uint64_t>(s.id) + 1);
            s = probe_augment(s, srng);
        }
    }

    EvalArtifacts art;
    art.log = collect_path_log(loaded.net, eval_set, cfg.train);
    art.result = evaluate_binary(loaded.net, eval_set, cfg.train.mean, cfg.train.std_dev);

    art.path_log_path = (fs::path(out_dir) / "path_log.tsv").string();
    export_path_log(art.log, art.path_log_path);

    art.summary_path = (fs::path(out_dir) / "eval_summary.json").string();
    json j = log_summary_json(art.log, loaded.net.cost_table());
    j["accuracy"] = art.result.accuracy;
    std::ofstream out(art.summary_path);
    out << j.dump(2) << "\n";
    return art;
}

std::vector<std::vector<double>> load_feature_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) row.push_back(std::stod(item));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_feature_file(const std::vector<std::vector<double>>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature file: " + path);
    out.precision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

AnalyzeArtifacts cmd_analyze(const std::string& log_path, const std::string& features_path,
                             const std::string& baseline_log_path, const std::string& out_dir) {
    ensure_dir(out_dir);
    PathLog log = parse_path_log(log_path);
    log.validate();

    json report;
    report["records"] = log.records.size();
    report["n"] = log.depth;
    report["num_classes"] = log.num_classes;
    if (!log.records.empty()) {
        report["unique_paths"] = unique_path_count(log);
        double mean_run = 0.0;
        for (const PathRecord& r : log.records) mean_run += expected_run_count(r.relaxed);
        report["mean_expected_run_count"] = mean_run / static_cast<double>(log.records.size());
    }

    AnalyzeArtifacts art;

    // Path frequency histogram, plot-ready.
    art.histogram_csv_path = (fs::path(out_dir) / "path_histogram.csv").string();
    {
        std::map<std::string, int> hist;
        for (const PathRecord& r : log.records) ++hist[r.path.to_string()];
        std::ofstream out(art.histogram_csv_path);
        out << "path,count\n";
        for (const auto& [p, c] : hist) out << p << ',' << c << "\n";
    }

    art.projection_csv_path = (fs::path(out_dir) / "projection.csv").string();
    export_projection(log, art.projection_csv_path);

    if (!features_path.empty()) {
        auto features = load_feature_file(features_path);
        if (features.size() != log.records.size())
            throw DataError("feature file has " + std::to_string(features.size()) +
                            " rows, path log has " + std::to_string(log.records.size()));
        SimilarityReport sim = path_similarity_correlation(log, features, Rng(1234, streams::kPairs));
        if (sim.defined) {
            report["pcc"] = sim.pcc_value;
            report["pcc_pairs"] = sim.pairs;
            art.scatter_csv_path = (fs::path(out_dir) / "similarity_scatter.csv").string();
            std::ofstream out(art.scatter_csv_path);
            out << "feature_cosine,path_cosine\n";
            for (std::size_t i = 0; i < sim.feature_cosines.size(); ++i)
                out << fixed6(sim.feature_cosines[i]) << ',' << fixed6(sim.path_cosines[i]) << "\n";
        } else {
            report["pcc"] = nullptr;
            report["pcc_notice"] = "undefined correlation (too few usable pairs or zero variance)";
        }
    } else if (log.records.size() < 2) {
        report["pcc"] = nullptr;
        report["pcc_notice"] = "skipped: fewer than two records";
    }

    if (!baseline_log_path.empty()) {
        PathLog base = parse_path_log(baseline_log_path);
        base.validate();
        if (base.depth != log.depth)
            throw DataError("baseline log depth differs from primary log");
        std::size_t paired = 0, matches = 0;
        double mean_kl = 0.0;
        std::map<std::int64_t, const PathRecord*> by_id;
        for (const PathRecord& r : base.records) by_id[r.id] = &r;
        for (const PathRecord& r : log.records) {
            auto it = by_id.find(r.id);
            if (it == by_id.end()) continue;
            ++paired;
            if (r.path == it->second->path) ++matches;
            mean_kl += kl_divergence(r.prediction, it->second->prediction);
        }
        json cmp;
        cmp["paired_records"] = paired;
        cmp["path_match_rate"] = paired ? static_cast<double>(matches) / paired : 0.0;
        cmp["mean_prediction_kl"] = paired ? mean_kl / paired : 0.0;
        cmp["primary_unique_paths"] = log.records.empty() ? 0 : unique_path_count(log);
        cmp["baseline_unique_paths"] = base.records.empty() ? 0 : unique_path_count(base);
        report["paired_comparison"] = cmp;
    }

    art.report_path = (fs::path(out_dir) / "analysis.json").string();
    std::ofstream out(art.report_path);
    out << report.dump(2) << "\n";
    return art;
}

SweepArtifacts cmd_sweep(const Config& cfg, const std::vector<double>& gammas,
                         const std::string& out_dir) {
    if (gammas.size() < 2) throw ConfigError("sweep requires at least two gamma values");
    ensure_dir(out_dir);

    SweepArtifacts art;
    for (double gamma : gammas) {
        Config run_cfg = cfg;
        run_cfg.train.reg.gamma = gamma;
        std::ostringstream name;
        name << "gamma_" << gamma;
        const std::string run_dir = (fs::path(out_dir) / name.str()).string();
        TrainArtifacts run = cmd_train(run_cfg, run_dir);

        SweepRow row;
        row.gamma = gamma;
        row.accuracy = run.final_eval.accuracy;
        row.mean_gmaccs = run.final_eval.mean_cost_maccs / 1e9;
        row.unique_paths = run.unique_paths;
        art.rows.push_back(row);
    }
    // Speedup against the full gated cost (identical for every row).
    {
        Rng rng(cfg.train.seed);
        DynamicNet probe = DynamicNet::build(cfg.net, cfg.gumbel, rng);
        const double full_gmaccs = probe.cost_table().total() / 1e9;
        for (SweepRow& row : art.rows)
            row.speedup = row.mean_gmaccs > 0.0 ? full_gmaccs / row.mean_gmaccs
                                                : std::numeric_limits<double>::infinity();
    }

    std::sort(art.rows.begin(), art.rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.gamma < b.gamma; });

    art.report_path = (fs::path(out_dir) / "sweep.json").string();
    json rows = json::array();
    for (const SweepRow& r : art.rows) {
        json j;
        j["gamma"] = r.gamma;
        j["accuracy"] = r.accuracy;
        j["mean_gmaccs"] = r.mean_gmaccs;
        j["speedup"] = std::isfinite(r.speedup) ? json(r.speedup) : json("inf");
        j["unique_paths"] = r.unique_paths;
        rows.push_back(j);
    }
    std::ofstream out(art.report_path);
    out << json{{"rows", rows}}.dump(2) << "\n";
    return art;
}

} // namespace codinet
