#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codinet/commands.hpp"

namespace {

std::vector<double> parse_gammas(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"codinet: dynamic-routing training, evaluation and path analytics"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, log_path, features_path, baseline_path;
    std::string gammas_csv, out_dir;
    std::vector<std::string> overrides;

    CLI::App* train = app.add_subcommand("train", "two-stage training run");
    train->add_option("--config", config_path, "config file")->required();
    train->add_option("--set", overrides, "override, key=value (repeatable)");
    train->add_option("--out", out_dir, "output directory (CODINET_OUT overrides)");

    CLI::App* eval = app.add_subcommand("eval", "binary-gated evaluation of a checkpoint");
    eval->add_option("--config", config_path, "config file")->required();
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval->add_option("--set", overrides, "override, key=value (repeatable)");
    eval->add_option("--out", out_dir, "output directory (CODINET_OUT overrides)");

    CLI::App* analyze = app.add_subcommand("analyze", "path-distribution reports for a log");
    analyze->add_option("--log", log_path, "path log file")->required();
    analyze->add_option("--features", features_path, "per-record feature vectors (csv)");
    analyze->add_option("--baseline-log", baseline_path, "second log for a paired comparison");
    analyze->add_option("--out", out_dir, "output directory (CODINET_OUT overrides)");

    CLI::App* sweep = app.add_subcommand("sweep", "train one model per gamma");
    sweep->add_option("--config", config_path, "config file")->required();
    sweep->add_option("--gammas", gammas_csv, "comma-separated gamma list")->required();
    sweep->add_option("--set", overrides, "override, key=value (repeatable)");
    sweep->add_option("--out", out_dir, "output directory (CODINET_OUT overrides)");

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string out = codinet::resolve_out_dir(out_dir);
        if (train->parsed()) {
            codinet::Config cfg = codinet::parse_config(config_path, overrides);
            auto art = codinet::cmd_train(cfg, out);
            std::cout << "checkpoint: " << art.checkpoint_path << "\n"
                      << "metrics:    " << art.metrics_path << "\n"
                      << "summary:    " << art.summary_path << "\n"
                      << "val acc:    " << art.final_eval.accuracy << "\n"
                      << "mean cost:  " << art.final_eval.mean_cost_maccs / 1e9 << " GMACCs\n"
                      << "paths:      " << art.unique_paths << "\n";
        } else if (eval->parsed()) {
            codinet::Config cfg = codinet::parse_config(config_path, overrides);
            auto art = codinet::cmd_eval(cfg, checkpoint_path, out);
            std::cout << "path log: " << art.path_log_path << "\n"
                      << "summary:  " << art.summary_path << "\n"
                      << "accuracy: " << art.result.accuracy << "\n";
        } else if (analyze->parsed()) {
            auto art = codinet::cmd_analyze(log_path, features_path, baseline_path, out);
            std::cout << "report: " << art.report_path << "\n";
        } else if (sweep->parsed()) {
            codinet::Config cfg = codinet::parse_config(config_path, overrides);
            auto art = codinet::cmd_sweep(cfg, parse_gammas(gammas_csv), out);
            std::cout << "sweep report: " << art.report_path << "\n";
            for (const auto& row : art.rows)
                std::cout << "  gamma " << row.gamma << ": acc " << row.accuracy << ", "
                          << row.mean_gmaccs << " GMACCs, " << row.unique_paths << " paths\n";
        }
        return codinet::kExitOk;
    } catch (const codinet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return codinet::kExitConfig;
    } catch (const codinet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return codinet::kExitData;
    } catch (const codinet::DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return codinet::kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return codinet::kExitGeneric;
    }
}
