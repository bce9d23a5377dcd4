// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evtherm/commands.hpp"
#include "evtherm/csv.hpp"

namespace {

using namespace evtherm;

/// Parses the two `--anomaly module=<id> r_hs_scale=<f>` tokens.
void parse_anomaly_tokens(const std::vector<std::string>& tokens,
                          cli::SimulateOptions& options) {
    for (const std::string& token : tokens) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--anomaly expects key=value tokens");
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "module") {
            options.anomaly_module = static_cast<int>(parse_int(value));
        } else if (key == "r_hs_scale") {
            options.r_hs_scale = parse_double(value);
        } else {
            throw CLI::ValidationError("--anomaly: unknown key '" + key + "'");
        }
    }
    if (options.anomaly_module < 0) {
        throw CLI::ValidationError("--anomaly requires module=<id>");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Charging-station thermal simulation, ensemble training and "
                 "anomaly detection"};
    app.set_version_flag("--version", cli::kToolVersion);
    app.require_subcommand(1);

    cli::SimulateOptions sim;
    std::vector<std::string> anomaly_tokens;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Simulate one day of station operation");
    simulate->add_option("--config", sim.config_path,
                         "Config file (defaults used when omitted)");
    CLI::Option* seed_opt =
        simulate->add_option("--seed", sim.seed, "Random seed for the run");
    simulate->add_option("--params", sim.params_path,
                         "Reuse thermal parameters from a previous run");
    simulate
        ->add_option("--anomaly", anomaly_tokens,
                     "Inject a fault: module=<id> r_hs_scale=<f>")
        ->expected(2);
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();

    cli::TrainOptions train;
    CLI::App* train_cmd =
        app.add_subcommand("train", "Train the model ensemble on a dataset");
    train_cmd->add_option("--data", train.data_csv, "Dataset CSV")->required();
    train_cmd->add_option("--seed", train.seed, "Random seed for split/training");
    train_cmd->add_option("--out", train.out_model, "Model file to write")
        ->required();
    train_cmd->add_option("--epochs", train.epochs, "Training epochs");
    train_cmd->add_option("--batch", train.batch_size, "Minibatch size");
    train_cmd->add_option("--members", train.members, "Ensemble size");
    train_cmd->add_option("--train-frac", train.train_frac,
                          "Training fraction of the split");

    cli::DetectOptions detect;
    CLI::App* detect_cmd =
        app.add_subcommand("detect", "Detect anomalous modules in a dataset");
    detect_cmd->add_option("--model", detect.model_path, "Model file")->required();
    detect_cmd->add_option("--data", detect.data_csv, "Dataset CSV")->required();
    detect_cmd->add_option("--out", detect.out_dir, "Output directory")->required();
    detect_cmd->add_option("--threshold", detect.threshold,
                           "Filtered-error threshold for the decision rule");
    detect_cmd->add_option("--fraction", detect.fraction_rule,
                           "Fraction of samples that must exceed the threshold");
    detect_cmd->add_option("--ema-alpha", detect.ema_alpha, "EMA decay rate");
    detect_cmd->add_option("--sma-window", detect.sma_window,
                           "SMA window length in samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            sim.seed_overridden = seed_opt->count() > 0;
            if (!anomaly_tokens.empty()) parse_anomaly_tokens(anomaly_tokens, sim);
            return cli::cmd_simulate(sim);
        }
        if (train_cmd->parsed()) {
            return cli::cmd_train(train);
        }
        return cli::cmd_detect(detect);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitData;
    }
}
