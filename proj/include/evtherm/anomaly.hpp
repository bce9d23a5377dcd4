// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evtherm {

/// Absolute prediction error in degrees Celsius.
double absolute_error(double truth_c, double prediction_c);

/// Absolute error divided by the ensemble sample standard deviation; the
/// divisor is floored so exact member agreement cannot blow the metric up.
double normalized_error(double truth_c, double prediction_c, double sample_std_c,
                        double std_floor_c = 1e-3);

/// Simple moving average with an n-sample window; the first n-1 outputs
/// use the available prefix. n must be >= 1.
std::vector<double> sma(std::span<const double> series, std::size_t window);

/// Cumulative moving average (prefix mean).
std::vector<double> cma(std::span<const double> series);

/// Exponential moving average: first output is the first input, then
/// out_k = alpha * x_k + (1 - alpha) * out_{k-1}. alpha in (0, 1].
std::vector<double> ema(std::span<const double> series, double alpha);

struct FilterParams {
    std::size_t sma_window = 500;  ///< one hour on the 7.2 s grid
    double ema_alpha = 4e-3;
    double std_floor_c = 1e-3;
};

/// Per-step anomaly metrics for one module. The moving-average series
/// filter the normalized error, which is what the decision rule evaluates.
struct MetricSeries {
    std::vector<double> ae;
    std::vector<double> ae_norm;
    std::vector<double> sma;
    std::vector<double> cma;
    std::vector<double> ema;
    FilterParams params;
};

MetricSeries compute_metrics(std::span<const double> truth_c,
                             std::span<const double> prediction_c,
                             std::span<const double> sample_std_c,
                             FilterParams params = {});

/// Right-open fixed-width bins starting at 0; values are expected to be
/// non-negative. Counts sum to the input length.
struct Histogram {
    double bin_width = 2.0;
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, double bin_width);

/// Verdict for one module: anomalous iff strictly more than fraction_rule
/// of the filtered error series lies strictly above the threshold.
struct AnomalyReport {
    int module_id = -1;
    double fraction_above = 0.0;
    double threshold = 30.0;
    double fraction_rule = 0.20;
    bool anomalous = false;
    Histogram hist;
};

AnomalyReport classify(std::span<const double> ema_series, int module_id,
                       double threshold = 30.0, double fraction_rule = 0.20,
                       double hist_bin_width = 2.0);

/// Percentile with linear interpolation between order statistics,
/// pct in [0, 100].
double percentile(std::vector<double> values, double pct);

}  // namespace evtherm
