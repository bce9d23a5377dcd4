// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "evtherm/dataset.hpp"
#include "evtherm/rng.hpp"

namespace evtherm {

/// Layer widths of one feedforward network. The production configuration
/// maps a 125-sample loss window through hidden layers of 128 and 64 ReLU
/// units to a single temperature output.
struct MlpShape {
    int input = 125;
    int hidden1 = 128;
    int hidden2 = 64;

    bool operator==(const MlpShape&) const = default;
};

/// Dense weights of one network, all in normalized input/target space.
/// Also serves as the container for gradients and optimizer moments,
/// which share the same shapes.
struct MlpWeights {
    Eigen::MatrixXd w1;     ///< hidden1 x input
    Eigen::VectorXd b1;     ///< hidden1
    Eigen::MatrixXd w2;     ///< hidden2 x hidden1
    Eigen::VectorXd b2;     ///< hidden2
    Eigen::RowVectorXd w3;  ///< 1 x hidden2
    double b3 = 0.0;

    static MlpWeights zeros(const MlpShape& shape);
    MlpShape shape() const;
    void require_finite() const;
};

/// Glorot-uniform weight initialization (biases zero), drawn row-major
/// from w1 through w3 so a seed pins the exact weights.
MlpWeights init_weights(const MlpShape& shape, Rng& rng);

/// Single-input forward pass; input and output are in normalized space.
double forward(const MlpWeights& weights, std::span<const double> input);

/// Batched forward pass over column-major inputs, one sample per column.
Eigen::RowVectorXd forward_batch(const MlpWeights& weights,
                                 const Eigen::MatrixXd& inputs);

/// Mean squared error of the batch.
double mse(const MlpWeights& weights, const Eigen::MatrixXd& inputs,
           const Eigen::VectorXd& targets);

/// Analytic backpropagation gradients of the batch-mean squared error.
/// The ReLU subgradient at exactly zero is taken as zero.
MlpWeights mse_gradient(const MlpWeights& weights, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets);

struct AdamParams {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators plus the step counter.
struct AdamState {
    MlpWeights m;
    MlpWeights v;
    long step_count = 0;
    AdamParams params;

    static AdamState init(const MlpShape& shape, AdamParams params = {});
};

/// One bias-corrected Adam update of `weights` in place.
void adam_step(AdamState& state, MlpWeights& weights, const MlpWeights& grads);

struct TrainSettings {
    int epochs = 100;
    int batch_size = 64;
    AdamParams adam;
    MlpShape shape;
};

struct MemberResult {
    MlpWeights weights;        ///< checkpoint with the lowest validation MSE
    double best_val_mse = 0.0; ///< in normalized units
    int best_epoch = 0;
    double final_val_mse = 0.0;
};

/// Trains one network: seeded initialization, per-epoch reshuffle,
/// minibatch Adam on MSE, and per-epoch validation checkpointing. Throws
/// std::runtime_error with a diagnostic if the loss stops being finite.
MemberResult train_member(const DesignMatrices& train, const DesignMatrices& val,
                          std::uint64_t seed, const TrainSettings& settings = {});

/// Model ensemble: trained members plus the normalization that maps raw
/// windows to network space and predictions back to temperature.
struct Ensemble {
    std::vector<MlpWeights> members;
    NormStats norm;
    std::vector<std::uint64_t> member_seeds;
};

struct EnsembleTrainResult {
    Ensemble ensemble;
    std::vector<MemberResult> member_results;
};

/// Trains `n_members` networks seeded base_seed, base_seed+1, ... Members
/// are independent, so they run concurrently; results are identical to a
/// sequential run.
EnsembleTrainResult train_ensemble(const DesignMatrices& train,
                                   const DesignMatrices& val,
                                   const NormStats& norm,
                                   std::uint64_t base_seed, int n_members = 10,
                                   const TrainSettings& settings = {});

/// Ensemble output for one raw-unit loss window: member predictions in
/// degrees Celsius, their mean, and the N-1 sample standard deviation.
struct Prediction {
    double mean_c = 0.0;
    double std_c = 0.0;
    std::vector<double> member_c;
};

Prediction predict(const Ensemble& ensemble, std::span<const double> window_w);

/// Batched prediction over raw-unit windows, one per column.
struct BatchPrediction {
    Eigen::VectorXd mean_c;
    Eigen::VectorXd std_c;
    Eigen::MatrixXd member_c;  ///< samples x members
};

BatchPrediction predict_batch(const Ensemble& ensemble,
                              const Eigen::MatrixXd& windows_w);

/// Student-t quantile, used for confidence intervals on the ensemble mean.
double student_t_quantile(double probability, int dof);

/// Two-sided confidence interval mean +/- t * s / sqrt(n) at the given
/// level. Requires n >= 2.
std::pair<double, double> confidence_interval(double mean, double sample_std,
                                              int n = 10, double level = 0.99);

}  // namespace evtherm
