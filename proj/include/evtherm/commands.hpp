// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace evtherm::cli {

inline constexpr char kToolVersion[] = "0.1.0";

/// Exit codes are machine-readable: 0 success (and no anomaly for detect),
/// 2 usage error, 3 data error, 4 anomaly detected.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitAnomaly = 4;

struct SimulateOptions {
    std::string config_path;  ///< empty: built-in defaults
    bool seed_overridden = false;
    std::uint64_t seed = 1;
    std::string params_path;  ///< reuse thermal parameters from this file
    int anomaly_module = -1;  ///< -1: no injected fault
    double r_hs_scale = 1.0;
    std::string out_dir;
};

/// Simulates one day and writes dataset.csv, allocation.csv,
/// thermal_params.json, config_used.cfg and manifest.json into out_dir.
int cmd_simulate(const SimulateOptions& options);

struct TrainOptions {
    std::string data_csv;
    std::uint64_t seed = 1;
    std::string out_model;
    int epochs = 100;
    int batch_size = 64;
    int members = 10;
    double train_frac = 0.8;
};

/// Trains the model ensemble on a dataset CSV and writes the model file,
/// including the filtered-error baseline of the training day.
int cmd_train(const TrainOptions& options);

struct DetectOptions {
    std::string model_path;
    std::string data_csv;
    std::string out_dir;
    double threshold = 30.0;
    double fraction_rule = 0.20;
    double ema_alpha = 4e-3;
    std::size_t sma_window = 500;
};

/// Runs ensemble predictions over a dataset, writes metrics.csv, report.txt,
/// per-module SVG plots, a histogram and manifest.json. Returns kExitAnomaly
/// when at least one module is classified anomalous.
int cmd_detect(const DetectOptions& options);

}  // namespace evtherm::cli
