#pragma once

#include <string>
#include <vector>

#include "codinet/analytics.hpp"
#include "codinet/checkpoint.hpp"
#include "codinet/config.hpp"

namespace codinet {

// Process exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitGeneric = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDivergence = 4;

/// Output directory resolution: the CODINET_OUT environment variable
/// overrides `requested`; empty falls back to "./out".
std::string resolve_out_dir(const std::string& requested);

struct DatasetSplits {
    std::vector<Sample> train;
    std::vector<Sample> eval;
};

/// Materializes the configured dataset (synthetic generator or CIFAR-10
/// binary files under data.root).
DatasetSplits load_dataset(const Config& cfg);

struct TrainArtifacts {
    std::string checkpoint_path;
    std::string metrics_path;
    std::string summary_path;
    TrainReport stage1;
    TrainReport stage2;
    EvalResult final_eval;
    std::size_t unique_paths = 0;
};

/// Stage 1 + stage 2, then final binary evaluation. Writes
/// checkpoint.bin, metrics.jsonl (deterministic fields only) and
/// summary.json under out_dir.
TrainArtifacts cmd_train(const Config& cfg, const std::string& out_dir);

struct EvalArtifacts {
    std::string path_log_path;
    std::string summary_path;
    PathLog log;
    EvalResult result;
};

/// Binary-gated evaluation of a checkpoint over the eval split; writes the
/// path log and a summary.
EvalArtifacts cmd_eval(const Config& cfg, const std::string& checkpoint_path,
                       const std::string& out_dir);

struct AnalyzeArtifacts {
    std::string report_path;
    std::string histogram_csv_path;
    std::string scatter_csv_path; // written when features are supplied
    std::string projection_csv_path;
};

/// Path-distribution reports for a log, optionally against per-record
/// feature vectors (PCC) and a baseline log (paired comparison).
AnalyzeArtifacts cmd_analyze(const std::string& log_path, const std::string& features_path,
                             const std::string& baseline_log_path, const std::string& out_dir);

struct SweepRow {
    double gamma = 0.0;
    double accuracy = 0.0;
    double mean_gmaccs = 0.0;
    double speedup = 0.0;
    std::size_t unique_paths = 0;
};

struct SweepArtifacts {
    std::string report_path;
    std::vector<SweepRow> rows;
};

/// Trains one model per gamma (shared seed), evaluates each, and emits a
/// cost/accuracy table ordered by gamma. Requires at least two gammas.
SweepArtifacts cmd_sweep(const Config& cfg, const std::vector<double>& gammas,
                         const std::string& out_dir);

/// Per-record feature file: one line per path-log record, comma-separated
/// floats.
std::vector<std::vector<double>> load_feature_file(const std::string& path);
void write_feature_file(const std::vector<std::vector<double>>& rows, const std::string& path);

} // namespace codinet
