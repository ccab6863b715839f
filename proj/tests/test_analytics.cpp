#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "codinet/analytics.hpp"

using namespace codinet;

namespace {

PathRecord record(std::int64_t id, std::string bits, std::vector<double> pred) {
    PathRecord r;
    r.id = id;
    r.label = static_cast<int>(id % 3);
    r.path = RoutingPath::from_string(bits);
    r.relaxed.assign(r.path.bits.begin(), r.path.bits.end());
    for (std::size_t k = 0; k < r.path.bits.size(); ++k)
        if (r.path.bits[k]) r.cost_maccs += 100.0 * (1.0 + static_cast<double>(k));
    r.prediction = std::move(pred);
    return r;
}

std::string temp_file(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("unique_path_count") {
    PathLog log;
    log.depth = 3;
    log.num_classes = 3;
    SUBCASE("single repeated path") {
        for (int i = 0; i < 5; ++i) log.records.push_back(record(i, "101", {1, 0, 0}));
        CHECK(unique_path_count(log) == 1);
    }
    SUBCASE("all 8 patterns of n=3") {
        for (int mask = 0; mask < 8; ++mask) {
            std::string bits(3, '0');
            for (int k = 0; k < 3; ++k)
                if ((mask >> k) & 1) bits[static_cast<std::size_t>(k)] = '1';
            log.records.push_back(record(mask, bits, {0, 1, 0}));
        }
        CHECK(unique_path_count(log) == 8);
    }
    SUBCASE("random log matches an independent set pass") {
        Rng rng(17);
        std::set<std::string> brute;
        for (int i = 0; i < 1000; ++i) {
            std::string bits(3, '0');
            for (int k = 0; k < 3; ++k)
                if (rng.bernoulli(0.5)) bits[static_cast<std::size_t>(k)] = '1';
            brute.insert(bits);
            log.records.push_back(record(i, bits, {0, 0, 1}));
        }
        CHECK(unique_path_count(log) == brute.size());
        CHECK(unique_path_count(log) <= 8); // 2^n cap
    }
    SUBCASE("empty log rejected") { CHECK_THROWS_AS(unique_path_count(log), UsageError); }
}

TEST_CASE("expected_run_count") {
    CHECK(expected_run_count({1, 1, 1, 1, 1, 1}) == 6.0);
    CHECK(expected_run_count({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}) == 3.0);
    CHECK(expected_run_count({0.1, 0.9, 0.4}) == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("kl_divergence closed forms and bounds") {
    CHECK(std::fabs(kl_divergence({0.3, 0.7}, {0.3, 0.7})) <= 1e-9);
    CHECK(kl_divergence({1, 0}, {0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    const double expect = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
    CHECK(kl_divergence({0.5, 0.5}, {0.25, 0.75}) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(kl_divergence({0.5, 0.5}, {0.25, 0.75}) == doctest::Approx(0.1438).epsilon(1e-3));

    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(4), q(4);
        double sp = 0, sq = 0;
        for (int i = 0; i < 4; ++i) {
            p[static_cast<std::size_t>(i)] = rng.uniform_open();
            q[static_cast<std::size_t>(i)] = rng.uniform_open();
            sp += p[static_cast<std::size_t>(i)];
            sq += q[static_cast<std::size_t>(i)];
        }
        for (auto& v : p) v /= sp;
        for (auto& v : q) v /= sq;
        CHECK(kl_divergence(p, q) >= -1e-9);
    }
    CHECK_THROWS_AS(kl_divergence({1, 0}, {0.5, 0.25, 0.25}), UsageError);
    CHECK_THROWS_AS(kl_divergence({0.6, 0.6}, {0.5, 0.5}), UsageError);
}

TEST_CASE("pcc") {
    const std::vector<double> xs{1, 2, 3, 4};
    SUBCASE("identity and negation") {
        CHECK(pcc(xs, xs) == doctest::Approx(1.0).epsilon(1e-12));
        std::vector<double> neg;
        for (double v : xs) neg.push_back(-v);
        CHECK(pcc(xs, neg) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("frozen direct-formula oracle") {
        // mean 2.5 each; cov 3; var 5 and 5 -> 3/5
        CHECK(pcc(xs, {2, 1, 4, 3}) == doctest::Approx(0.6).epsilon(1e-12));
    }
    SUBCASE("invariant under positive affine maps, sign flips under negation") {
        const std::vector<double> ys{2, 1, 4, 3};
        std::vector<double> scaled;
        for (double v : xs) scaled.push_back(3.5 * v + 11.0);
        CHECK(pcc(scaled, ys) == doctest::Approx(pcc(xs, ys)).epsilon(1e-12));
        std::vector<double> flipped;
        for (double v : xs) flipped.push_back(-2.0 * v + 1.0);
        CHECK(pcc(flipped, ys) == doctest::Approx(-pcc(xs, ys)).epsilon(1e-12));
    }
    SUBCASE("zero variance is an error") {
        CHECK_THROWS_AS(pcc({1, 1, 1}, {1, 2, 3}), UsageError);
        CHECK_THROWS_AS(pcc({1, 2}, {5, 5}), UsageError);
    }
}

TEST_CASE("cost_report") {
    CostTable table;
    table.entries = {100, 200, 300};
    PathLog log;
    log.depth = 3;
    log.num_classes = 3;
    SUBCASE("all-ones paths give speedup 1.0") {
        for (int i = 0; i < 4; ++i) log.records.push_back(record(i, "111", {1, 0, 0}));
        CostReport r = cost_report(log, table);
        CHECK(r.speedup == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.mean_gmaccs == doctest::Approx(600.0 / 1e9).epsilon(1e-12));
    }
    SUBCASE("half full, half empty gives speedup 2.0") {
        for (int i = 0; i < 10; ++i)
            log.records.push_back(record(i, i % 2 ? "111" : "000", {1, 0, 0}));
        CHECK(cost_report(log, table).speedup == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("mixed log matches a brute-force accumulation") {
        Rng rng(23);
        double brute = 0.0;
        for (int i = 0; i < 200; ++i) {
            std::string bits(3, '0');
            double c = 0.0;
            for (int k = 0; k < 3; ++k)
                if (rng.bernoulli(0.6)) {
                    bits[static_cast<std::size_t>(k)] = '1';
                    c += table.entries[static_cast<std::size_t>(k)];
                }
            brute += c;
            log.records.push_back(record(i, bits, {0, 1, 0}));
        }
        CostReport r = cost_report(log, table);
        CHECK(r.mean_gmaccs == doctest::Approx(brute / 200.0 / 1e9).epsilon(1e-12));
        CHECK(r.mean_gmaccs >= 0.0);
        CHECK(r.mean_gmaccs <= table.total() / 1e9);
    }
    SUBCASE("all-zero paths give infinite speedup") {
        log.records.push_back(record(0, "000", {1, 0, 0}));
        CHECK(std::isinf(cost_report(log, table).speedup));
    }
}

TEST_CASE("path log export, parse and round trip") {
    const std::string path = temp_file("codinet_pathlog.tsv");
    PathLog log;
    log.depth = 4;
    log.num_classes = 3;
    SUBCASE("empty log exports a header-only file") {
        export_path_log(log, path);
        std::ifstream in(path);
        std::string line;
        REQUIRE(std::getline(in, line));
        CHECK(line.find("n=4") != std::string::npos);
        CHECK(line.find("num_classes=3") != std::string::npos);
        CHECK(!std::getline(in, line));
        PathLog parsed = parse_path_log(path);
        CHECK(parsed.depth == 4);
        CHECK(parsed.num_classes == 3);
        CHECK(parsed.records.empty());
    }
    SUBCASE("records round-trip exactly") {
        Rng rng(31);
        for (int i = 0; i < 20; ++i) {
            PathRecord r;
            r.id = i;
            r.label = static_cast<int>(rng.uniform_index(3));
            std::string bits(4, '0');
            for (int k = 0; k < 4; ++k)
                if (rng.bernoulli(0.5)) bits[static_cast<std::size_t>(k)] = '1';
            r.path = RoutingPath::from_string(bits);
            for (int k = 0; k < 4; ++k) r.relaxed.push_back(0.125 * static_cast<double>(k) + 0.0625);
            r.cost_maccs = static_cast<double>(rng.uniform_index(100000));
            r.prediction = {0.5, 0.25, 0.25};
            log.records.push_back(std::move(r));
        }
        export_path_log(log, path);
        PathLog parsed = parse_path_log(path);
        REQUIRE(parsed.records.size() == log.records.size());
        for (std::size_t i = 0; i < log.records.size(); ++i) {
            CHECK(parsed.records[i].id == log.records[i].id);
            CHECK(parsed.records[i].label == log.records[i].label);
            CHECK(parsed.records[i].path == log.records[i].path);
            CHECK(parsed.records[i].cost_maccs == log.records[i].cost_maccs);
            for (std::size_t k = 0; k < 4; ++k)
                CHECK(parsed.records[i].relaxed[k] ==
                      doctest::Approx(log.records[i].relaxed[k]).epsilon(1e-6));
        }
        // export(parse(file)) reproduces the file byte for byte
        const std::string again = temp_file("codinet_pathlog2.tsv");
        export_path_log(parsed, again);
        std::ifstream a(path), b(again);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        std::remove(again.c_str());
    }
    SUBCASE("malformed header rejected") {
        std::ofstream(path) << "garbage\n";
        CHECK_THROWS_AS(parse_path_log(path), DataError);
    }
    std::remove(path.c_str());
}

TEST_CASE("pca projection of collinear points has no second component") {
    // Points on the line t * (1, 2, -1).
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 12; ++i) {
        const double t = 0.3 * i - 1.0;
        pts.push_back({t, 2 * t, -t});
    }
    auto proj = pca_project(pts, 2);
    REQUIRE(proj.size() == pts.size());
    double var2 = 0.0;
    for (const auto& p : proj) var2 += p[1] * p[1];
    CHECK(var2 / static_cast<double>(pts.size()) < 1e-18);

    // The first component carries all the variance.
    double var1 = 0.0;
    for (const auto& p : proj) var1 += p[0] * p[0];
    CHECK(var1 > 1.0);
}

TEST_CASE("export_projection writes one row per record") {
    const std::string path = temp_file("codinet_proj.csv");
    PathLog log;
    log.depth = 3;
    log.num_classes = 3;
    for (int i = 0; i < 6; ++i) log.records.push_back(record(i, i % 2 ? "110" : "001", {1, 0, 0}));
    export_projection(log, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 7); // header + 6 records
    std::remove(path.c_str());
}

TEST_CASE("path similarity correlation recovers an obvious relationship") {
    // Two clusters: features and paths agree on the cluster structure, so
    // the correlation must come out strongly positive.
    PathLog log;
    log.depth = 4;
    log.num_classes = 3;
    std::vector<std::vector<double>> features;
    Rng rng(41);
    for (int i = 0; i < 40; ++i) {
        const bool cluster = i % 2 == 0;
        log.records.push_back(record(i, cluster ? "1100" : "0011", {1, 0, 0}));
        std::vector<double> f(8, 0.0);
        for (int k = 0; k < 8; ++k)
            f[static_cast<std::size_t>(k)] =
                (cluster == (k < 4) ? 1.0 : 0.05) + 0.01 * rng.normal();
        features.push_back(std::move(f));
    }
    SimilarityReport rep = path_similarity_correlation(log, features, Rng(5, streams::kPairs));
    CHECK(rep.defined);
    CHECK(rep.pcc_value > 0.9);
    CHECK(rep.pairs == 40u * 39u / 2u);

    SUBCASE("row count mismatch is an error") {
        features.pop_back();
        CHECK_THROWS_AS(path_similarity_correlation(log, features, Rng(5)), DataError);
    }
}
