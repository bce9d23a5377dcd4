// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evtherm/anomaly.hpp"
#include "evtherm/mlp.hpp"

namespace evtherm {

/// Training provenance stored next to the weights.
struct TrainingInfo {
    int epochs = 100;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t base_seed = 0;
    std::uint64_t split_seed = 0;
    std::size_t train_rows = 0;
    std::size_t validation_rows = 0;
    std::vector<double> member_val_rmse_c;
};

/// Distribution of the filtered training-set error metric, kept so fresh
/// data can be judged against a data-driven threshold alongside the fixed
/// one.
struct ErrorBaseline {
    double ema_alpha = 4e-3;
    std::size_t sma_window = 500;
    double std_floor_c = 1e-3;
    double train_ema_p99 = 0.0;
    Histogram train_ema_hist;
};

struct ModelFile {
    Ensemble ensemble;
    TrainingInfo training;
    ErrorBaseline baseline;
};

/// Writes the model as a structured JSON document. Every weight is stored
/// in row-major order with round-trip decimal precision; identical inputs
/// produce identical bytes.
void save_model(const std::string& path, const ModelFile& model);

/// Loads and validates a model file; throws std::runtime_error on format
/// or shape errors.
ModelFile load_model(const std::string& path);

}  // namespace evtherm
