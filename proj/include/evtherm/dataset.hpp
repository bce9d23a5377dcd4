// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evtherm/rng.hpp"

namespace evtherm {

/// Input window length: number of consecutive loss samples a model sees,
/// 15 minutes of operation on the 7.2 s grid.
inline constexpr std::size_t kWindowSize = 125;

/// One simulator output row: loss and recorded temperature of one module
/// at one step.
struct Record {
    std::size_t step = 0;
    double time_s = 0.0;
    int module_id = 0;
    double p_loss_w = 0.0;
    double t_hs_c = 0.0;
};

/// One training sample: the loss window ending at `step` (oldest first,
/// zero-padded before the day starts) and the recorded temperature there.
struct Sample {
    std::array<double, kWindowSize> window_w{};
    double target_c = 0.0;
    int module_id = 0;
    std::size_t step = 0;
};

/// Z-score statistics, computed on the training split only.
struct NormStats {
    double input_mean_w = 0.0;
    double input_std_w = 1.0;
    double target_mean_c = 0.0;
    double target_std_c = 1.0;
};

/// Builds one sample per record. Records may mix modules; steps must be
/// contiguous from 0 for each module. Output is ordered by module, then step.
std::vector<Sample> make_samples(const std::vector<Record>& records);

struct SplitResult {
    std::vector<Sample> train;
    std::vector<Sample> validation;
};

/// Random disjoint split: floor(train_frac * N) training samples, the rest
/// validation. Throws when fewer than 2 samples are supplied.
SplitResult split_samples(std::vector<Sample> samples, double train_frac,
                          Rng& rng);

/// Moments over all window entries and all targets of the training split.
/// Degenerate standard deviations are floored at 1e-6 of the data scale
/// (a warning is printed), so normalization never divides by zero.
NormStats compute_norm_stats(const std::vector<Sample>& train);

Sample apply_norm(const Sample& sample, const NormStats& stats);
Sample invert_norm(const Sample& sample, const NormStats& stats);

/// Normalized column-major matrices for training: inputs as one window per
/// column, targets as a vector.
struct DesignMatrices {
    Eigen::MatrixXd inputs;   ///< kWindowSize x N
    Eigen::VectorXd targets;  ///< N
};
DesignMatrices to_matrices(const std::vector<Sample>& samples,
                           const NormStats& stats);

/// Dataset CSV: header `step,time_s,module_id,p_loss_w,t_hs_c`, one row per
/// (step, module), steps outermost.
void write_dataset_csv(const std::string& path,
                       const std::vector<Record>& records);
std::vector<Record> read_dataset_csv(const std::string& path);

}  // namespace evtherm
