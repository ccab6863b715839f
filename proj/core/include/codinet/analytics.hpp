#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codinet/data.hpp"
#include "codinet/net.hpp"

namespace codinet {

struct PathRecord {
    std::int64_t id = 0;
    int label = 0;
    RoutingPath path;
    std::vector<double> relaxed;     // noiseless gate values
    double cost_maccs = 0.0;
    std::vector<double> prediction;  // sums to 1
};

/// Per-sample routing results of one evaluation pass.
struct PathLog {
    int depth = 0;       // n
    int num_classes = 0;
    std::vector<PathRecord> records;

    void validate() const; // unique ids, uniform lengths, prediction sums
};

/// Number of distinct binary paths in the log.
std::size_t unique_path_count(const PathLog& log);

/// Expected number of to-be-run blocks: sum of the relaxed gate values.
double expected_run_count(const std::vector<double>& relaxed);

/// KL(p||q) in nats with epsilon smoothing 1e-12. Both inputs must be
/// distributions of the same length (non-negative, sum to 1 within 1e-9).
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

/// Pearson correlation; throws on zero variance in either argument.
double pcc(const std::vector<double>& xs, const std::vector<double>& ys);

struct CostReport {
    double mean_gmaccs = 0.0;
    double full_gmaccs = 0.0;
    double speedup = 1.0; // full / mean; infinity when every path is empty
};

CostReport cost_report(const PathLog& log, const CostTable& table);

struct AugmentationProbe {
    double consistency_rate = 0.0;   // fraction of identical original/augmented paths
    double mean_prediction_kl = 0.0; // KL between original and augmented predictions
    double path_histogram_kl = 0.0;  // KL between path-frequency histograms
    std::size_t pairs = 0;
};

/// For each sample, compares the binary path and prediction of the
/// original against one probe-augmented variant (crop / hflip / vflip /
/// rotation).
AugmentationProbe augmentation_probe(const DynamicNet& net, const std::vector<Sample>& samples,
                                     const std::vector<double>& mean,
                    const std::vector<double>& std_dev, Rng rng);

/// Convenience wrapper over augmentation_probe returning only the rate.
double consistency_match_rate(const DynamicNet& net, const std::vector<Sample>& samples,
                              const std::vector<double>& mean, const std::vector<double>& std_dev,
                              Rng rng);

struct SimilarityReport {
    std::size_t pairs = 0;
    double pcc_value = 0.0;
    bool defined = true; // false when path or feature cosines have no variance
    std::vector<double> feature_cosines;
    std::vector<double> path_cosines;
};

/// Pearson correlation between feature-cosine and path-cosine over sampled
/// record pairs (at most `max_pairs`, seeded). Features come one vector
/// per record, aligned by position. All-zero paths are excluded from
/// cosine pairs.
SimilarityReport path_similarity_correlation(const PathLog& log,
                                             const std::vector<std::vector<double>>& features,
                                             Rng rng, std::size_t max_pairs = 100000);

/// Tab-separated path log with a header naming n and num_classes.
void export_path_log(const PathLog& log, const std::string& path);
PathLog parse_path_log(const std::string& path);

/// Relaxed paths plus their 2-component PCA projection, as CSV.
void export_projection(const PathLog& log, const std::string& path);

/// First `components` principal axes of the row vectors in `points`
/// (power iteration with deflation); returns the projected coordinates.
std::vector<std::vector<double>> pca_project(const std::vector<std::vector<double>>& points,
                                             int components);

} // namespace codinet
