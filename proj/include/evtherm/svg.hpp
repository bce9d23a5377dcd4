// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evtherm/anomaly.hpp"

namespace evtherm::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> y;
};

/// Shaded region between two series, drawn behind the lines (confidence
/// band).
struct Band {
    std::string label;
    std::string color;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<Series> series;
    std::optional<Band> band;
};

void write_line_chart(const std::string& path, const LineChart& chart);

/// One histogram per set, normalized to sample fractions so sets of
/// different sizes are comparable, overlaid with translucent fills.
struct HistogramSet {
    std::string label;
    std::string color;
    Histogram hist;
};

void write_histogram_chart(const std::string& path, const std::string& title,
                           const std::string& x_label,
                           const std::vector<HistogramSet>& sets);

}  // namespace evtherm::svg
