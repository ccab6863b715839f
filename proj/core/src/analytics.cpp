#include "codinet/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace codinet {

namespace {
constexpr double kKlEps = 1e-12;

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return num / (std::sqrt(na) * std::sqrt(nb));
}
} // namespace

void PathLog::validate() const {
    std::unordered_set<std::int64_t> ids;
    for (const PathRecord& r : records) {
        if (!ids.insert(r.id).second)
            throw DataError("path log has duplicate id " + std::to_string(r.id));
        if (r.path.bits.size() != static_cast<std::size_t>(depth) ||
            r.relaxed.size() != static_cast<std::size_t>(depth))
            throw DataError("path log record " + std::to_string(r.id) + " has wrong path length");
        if (r.prediction.size() != static_cast<std::size_t>(num_classes))
            throw DataError("path log record " + std::to_string(r.id) +
                            " has wrong prediction length");
        double s = 0.0;
        for (double p : r.prediction) s += p;
        if (std::fabs(s - 1.0) > 1e-9)
            throw DataError("path log record " + std::to_string(r.id) +
                            " prediction does not sum to 1");
    }
}

std::size_t unique_path_count(const PathLog& log) {
    if (log.records.empty()) throw UsageError("unique_path_count: empty log");
    std::unordered_set<std::string> seen;
    for (const PathRecord& r : log.records) seen.insert(r.path.to_string());
    return seen.size();
}

double expected_run_count(const std::vector<double>& relaxed) {
    double s = 0.0;
    for (double v : relaxed) s += v;
    return s;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw UsageError("kl_divergence: length mismatch");
    double sp = 0.0, sq = 0.0;
    for (double v : p) {
        if (v < 0.0) throw UsageError("kl_divergence: negative mass in p");
        sp += v;
    }
    for (double v : q) {
        if (v < 0.0) throw UsageError("kl_divergence: negative mass in q");
        sq += v;
    }
    if (std::fabs(sp - 1.0) > 1e-9 || std::fabs(sq - 1.0) > 1e-9)
        throw UsageError("kl_divergence: inputs must sum to 1 within 1e-9");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        kl += p[i] * std::log((p[i] + kKlEps) / (q[i] + kKlEps));
    return kl;
}

double pcc(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw UsageError("pcc: inputs must have equal length >= 2");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UsageError("pcc: undefined correlation, zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

CostReport cost_report(const PathLog& log, const CostTable& table) {
    CostReport r;
    r.full_gmaccs = table.total() / 1e9;
    if (log.records.empty()) return r;
    double mean = 0.0;
    for (const PathRecord& rec : log.records) {
        if (rec.path.bits.size() != table.entries.size())
            throw ShapeError("cost_report: table length does not match path length");
        double c = 0.0;
        for (std::size_t k = 0; k < table.entries.size(); ++k)
            if (rec.path.bits[k]) c += table.entries[k];
        mean += c;
    }
    mean /= static_cast<double>(log.records.size());
    r.mean_gmaccs = mean / 1e9;
    r.speedup = r.mean_gmaccs > 0.0 ? r.full_gmaccs / r.mean_gmaccs
                                    : std::numeric_limits<double>::infinity();
    return r;
}

AugmentationProbe augmentation_probe(const DynamicNet& net, const std::vector<Sample>& samples,
                                     const std::vector<double>& mean,
                                     const std::vector<double>& std_dev, Rng rng) {
    AugmentationProbe out;
    if (samples.empty()) return out;
    std::map<std::string, double> hist_orig, hist_aug;
    std::size_t matches = 0;
    for (const Sample& s : samples) {
        Rng srng = rng.fork(static_cast<std::uint64_t>(s.id) + 1);
        BinaryForwardResult orig = forward_binary(net, normalize(s.image, mean, std_dev));
        Sample aug = probe_augment(s, srng);
        BinaryForwardResult pert = forward_binary(net, normalize(aug.image, mean, std_dev));
        if (orig.path == pert.path) ++matches;

        std::vector<double> po(orig.logits.size()), pa(pert.logits.size());
        {
            // Predictions as softmax distributions.
            Tensor so = softmax(orig.logits), sa = softmax(pert.logits);
            po.assign(so.value().begin(), so.value().end());
            pa.assign(sa.value().begin(), sa.value().end());
        }
        out.mean_prediction_kl += kl_divergence(po, pa);
        hist_orig[orig.path.to_string()] += 1.0;
        hist_aug[pert.path.to_string()] += 1.0;
        ++out.pairs;
    }
    out.consistency_rate = static_cast<double>(matches) / static_cast<double>(out.pairs);
    out.mean_prediction_kl /= static_cast<double>(out.pairs);

    // Secondary indicator: KL between the two path-frequency histograms
    // over the union of observed paths.
    std::vector<double> hp, hq;
    for (const auto& [key, cnt] : hist_orig) {
        hp.push_back(cnt);
        auto it = hist_aug.find(key);
        hq.push_back(it == hist_aug.end() ? 0.0 : it->second);
    }
    for (const auto& [key, cnt] : hist_aug) {
        if (hist_orig.find(key) != hist_orig.end()) continue;
        hp.push_back(0.0);
        hq.push_back(cnt);
    }
    const double tot = static_cast<double>(out.pairs);
    for (double& v : hp) v /= tot;
    for (double& v : hq) v /= tot;
    out.path_histogram_kl = kl_divergence(hp, hq);
    return out;
}

double consistency_match_rate(const DynamicNet& net, const std::vector<Sample>& samples,
                              const std::vector<double>& mean, const std::vector<double>& std_dev,
                              Rng rng) {
    return augmentation_probe(net, samples, mean, std_dev, rng).consistency_rate;
}

SimilarityReport path_similarity_correlation(const PathLog& log,
                                             const std::vector<std::vector<double>>& features,
                                             Rng rng, std::size_t max_pairs) {
    if (features.size() != log.records.size())
        throw DataError("feature row count " + std::to_string(features.size()) +
                        " does not match path log size " + std::to_string(log.records.size()));
    SimilarityReport rep;

    // Indices of records whose path has a direction (not all-zero).
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < log.records.size(); ++i)
        if (log.records[i].path.popcount() > 0) usable.push_back(i);
    if (usable.size() < 2) {
        rep.defined = false;
        return rep;
    }

    std::vector<std::vector<double>> path_vecs(log.records.size());
    for (std::size_t i : usable) {
        const auto& bits = log.records[i].path.bits;
        path_vecs[i].assign(bits.begin(), bits.end());
    }

    const std::size_t all_pairs = usable.size() * (usable.size() - 1) / 2;
    if (all_pairs <= max_pairs) {
        for (std::size_t a = 0; a < usable.size(); ++a)
            for (std::size_t b = a + 1; b < usable.size(); ++b) {
                rep.feature_cosines.push_back(cosine(features[usable[a]], features[usable[b]]));
                rep.path_cosines.push_back(cosine(path_vecs[usable[a]], path_vecs[usable[b]]));
            }
    } else {
        for (std::size_t k = 0; k < max_pairs; ++k) {
            const std::size_t a = static_cast<std::size_t>(rng.uniform_index(usable.size()));
            std::size_t b = static_cast<std::size_t>(rng.uniform_index(usable.size() - 1));
            if (b >= a) ++b;
            rep.feature_cosines.push_back(cosine(features[usable[a]], features[usable[b]]));
            rep.path_cosines.push_back(cosine(path_vecs[usable[a]], path_vecs[usable[b]]));
        }
    }
    rep.pairs = rep.feature_cosines.size();
    try {
        rep.pcc_value = pcc(rep.feature_cosines, rep.path_cosines);
    } catch (const UsageError&) {
        rep.defined = false;
    }
    return rep;
}

namespace {

std::string format_fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", places, v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void export_path_log(const PathLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write path log: " + path);
    out << "#codinet-pathlog\tn=" << log.depth << "\tnum_classes=" << log.num_classes << "\n";
    for (const PathRecord& r : log.records) {
        out << r.id << '\t' << r.label << '\t' << r.path.to_string() << '\t';
        for (std::size_t k = 0; k < r.relaxed.size(); ++k) {
            if (k) out << ',';
            out << format_fixed(r.relaxed[k], 6);
        }
        out << '\t' << static_cast<long long>(std::llround(r.cost_maccs)) << '\t';
        for (std::size_t k = 0; k < r.prediction.size(); ++k) {
            if (k) out << ',';
            out << format_fixed(r.prediction[k], 6);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing path log: " + path);
}

PathLog parse_path_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open path log: " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError("path log is empty: " + path);
    PathLog log;
    if (std::sscanf(header.c_str(), "#codinet-pathlog\tn=%d\tnum_classes=%d", &log.depth,
                    &log.num_classes) != 2)
        throw DataError("malformed path log header: " + header);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 6)
            throw DataError("malformed path log line " + std::to_string(lineno));
        PathRecord rec;
        rec.id = std::stoll(fields[0]);
        rec.label = std::stoi(fields[1]);
        rec.path = RoutingPath::from_string(fields[2]);
        for (const std::string& v : split(fields[3], ','))
            if (!v.empty()) rec.relaxed.push_back(std::stod(v));
        rec.cost_maccs = std::stod(fields[4]);
        for (const std::string& v : split(fields[5], ','))
            if (!v.empty()) rec.prediction.push_back(std::stod(v));
        if (rec.path.bits.size() != static_cast<std::size_t>(log.depth))
            throw DataError("path length mismatch on line " + std::to_string(lineno));
        log.records.push_back(std::move(rec));
    }
    return log;
}

std::vector<std::vector<double>> pca_project(const std::vector<std::vector<double>>& points,
                                             int components) {
    if (points.empty()) return {};
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw UsageError("pca_project: ragged input");
    components = std::min<int>(components, static_cast<int>(dim));

    std::vector<double> mean(dim, 0.0);
    for (const auto& p : points)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += p[i];
    for (double& m : mean) m /= static_cast<double>(points.size());

    // Covariance (dim x dim); paths are short vectors, so this stays tiny.
    std::vector<double> cov(dim * dim, 0.0);
    for (const auto& p : points)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                cov[i * dim + j] += (p[i] - mean[i]) * (p[j] - mean[j]);
    for (double& c : cov) c /= static_cast<double>(points.size());

    std::vector<std::vector<double>> axes;
    double top_eig = 0.0;
    auto orthogonalize = [&axes](std::vector<double>& v) {
        for (const auto& a : axes) {
            double d = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * a[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * a[i];
        }
    };
    for (int comp = 0; comp < components; ++comp) {
        std::vector<double> v(dim, 0.0);
        v[static_cast<std::size_t>(comp) % dim] = 1.0;
        orthogonalize(v);
        double eig = 0.0;
        bool degenerate = false;
        for (int iter = 0; iter < 500; ++iter) {
            std::vector<double> next(dim, 0.0);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) next[i] += cov[i * dim + j] * v[j];
            orthogonalize(next); // keep the iterate in the residual subspace
            double norm = 0.0;
            for (double x : next) norm += x * x;
            norm = std::sqrt(norm);
            if (norm <= 1e-12 * std::max(top_eig, 1e-30)) {
                degenerate = true; // no variance left in this subspace
                break;
            }
            for (double& x : next) x /= norm;
            double delta = 0.0;
            for (std::size_t i = 0; i < dim; ++i) delta = std::max(delta, std::fabs(next[i] - v[i]));
            v = next;
            eig = norm;
            if (delta < 1e-13) break;
        }
        if (degenerate) v.assign(dim, 0.0);
        if (comp == 0) top_eig = eig;
        axes.push_back(v);
    }

    std::vector<std::vector<double>> projected(points.size(), std::vector<double>(axes.size(), 0.0));
    for (std::size_t r = 0; r < points.size(); ++r)
        for (std::size_t a = 0; a < axes.size(); ++a) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i) s += (points[r][i] - mean[i]) * axes[a][i];
            projected[r][a] = s;
        }
    return projected;
}

void export_projection(const PathLog& log, const std::string& path) {
    std::vector<std::vector<double>> pts;
    pts.reserve(log.records.size());
    for (const PathRecord& r : log.records) pts.push_back(r.relaxed);
    auto proj = pca_project(pts, 2);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write projection: " + path);
    out << "id,label";
    for (int k = 0; k < log.depth; ++k) out << ",v" << k;
    out << ",pc1,pc2\n";
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const PathRecord& r = log.records[i];
        out << r.id << ',' << r.label;
        for (double v : r.relaxed) out << ',' << format_fixed(v, 6);
        const double p1 = proj.empty() ? 0.0 : proj[i][0];
        const double p2 = proj.empty() || proj[i].size() < 2 ? 0.0 : proj[i][1];
        out << ',' << format_fixed(p1, 6) << ',' << format_fixed(p2, 6) << "\n";
    }
}

} // namespace codinet
