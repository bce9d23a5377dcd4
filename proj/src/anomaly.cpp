// SPDX-License-Identifier: Apache-2.0
#include "evtherm/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evtherm {

double absolute_error(double truth_c, double prediction_c) {
    return std::abs(truth_c - prediction_c);
}

double normalized_error(double truth_c, double prediction_c, double sample_std_c,
                        double std_floor_c) {
    if (sample_std_c < 0.0 || std_floor_c <= 0.0) {
        throw std::invalid_argument("normalized_error: std must be >= 0, floor > 0");
    }
    return absolute_error(truth_c, prediction_c) /
           std::max(sample_std_c, std_floor_c);
}

std::vector<double> sma(std::span<const double> series, std::size_t window) {
    if (window == 0) throw std::invalid_argument("sma: window must be >= 1");
    // Prefix sums in extended precision keep the windowed differences well
    // below the 1e-9 relative drift the naive recomputation allows.
    std::vector<long double> prefix(series.size() + 1, 0.0L);
    for (std::size_t i = 0; i < series.size(); ++i) {
        prefix[i + 1] = prefix[i] + static_cast<long double>(series[i]);
    }
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::size_t n = std::min(window, i + 1);
        out[i] = static_cast<double>((prefix[i + 1] - prefix[i + 1 - n]) /
                                     static_cast<long double>(n));
    }
    return out;
}

std::vector<double> cma(std::span<const double> series) {
    std::vector<double> out(series.size());
    long double sum = 0.0L;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sum += static_cast<long double>(series[i]);
        out[i] = static_cast<double>(sum / static_cast<long double>(i + 1));
    }
    return out;
}

std::vector<double> ema(std::span<const double> series, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("ema: alpha must be in (0, 1]");
    }
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        out[i] = i == 0 ? series[0]
                        : alpha * series[i] + (1.0 - alpha) * out[i - 1];
    }
    return out;
}

MetricSeries compute_metrics(std::span<const double> truth_c,
                             std::span<const double> prediction_c,
                             std::span<const double> sample_std_c,
                             FilterParams params) {
    if (truth_c.size() != prediction_c.size() ||
        truth_c.size() != sample_std_c.size()) {
        throw std::invalid_argument("compute_metrics: series length mismatch");
    }
    MetricSeries m;
    m.params = params;
    m.ae.resize(truth_c.size());
    m.ae_norm.resize(truth_c.size());
    for (std::size_t i = 0; i < truth_c.size(); ++i) {
        m.ae[i] = absolute_error(truth_c[i], prediction_c[i]);
        m.ae_norm[i] = normalized_error(truth_c[i], prediction_c[i],
                                        sample_std_c[i], params.std_floor_c);
    }
    m.sma = sma(m.ae_norm, params.sma_window);
    m.cma = cma(m.ae_norm);
    m.ema = ema(m.ae_norm, params.ema_alpha);
    return m;
}

Histogram histogram(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("histogram: bin width must be > 0");
    }
    Histogram h;
    h.bin_width = bin_width;
    for (double v : values) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw std::invalid_argument("histogram: values must be finite and >= 0");
        }
        const auto bin = static_cast<std::size_t>(v / bin_width);
        if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
        ++h.counts[bin];
    }
    return h;
}

AnomalyReport classify(std::span<const double> ema_series, int module_id,
                       double threshold, double fraction_rule,
                       double hist_bin_width) {
    if (ema_series.empty()) {
        throw std::invalid_argument("classify: empty series");
    }
    AnomalyReport report;
    report.module_id = module_id;
    report.threshold = threshold;
    report.fraction_rule = fraction_rule;
    const auto above = std::count_if(ema_series.begin(), ema_series.end(),
                                     [&](double v) { return v > threshold; });
    report.fraction_above =
        static_cast<double>(above) / static_cast<double>(ema_series.size());
    report.anomalous = report.fraction_above > fraction_rule;
    report.hist = histogram(ema_series, hist_bin_width);
    return report;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(pct >= 0.0 && pct <= 100.0)) {
        throw std::invalid_argument("percentile: pct must be in [0, 100]");
    }
    std::sort(values.begin(), values.end());
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    const double weight = rank - static_cast<double>(lo);
    return values[lo] + weight * (values[hi] - values[lo]);
}

}  // namespace evtherm
