// SPDX-License-Identifier: Apache-2.0
#include "evtherm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "evtherm/csv.hpp"

namespace evtherm::svg {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 24.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void widen_if_flat() {
        if (!(lo < hi)) {
            lo -= 1.0;
            hi += 1.0;
        }
    }
};

// Tick spacing snapped to 1/2/5 * 10^k.
std::vector<double> ticks(const Range& r, int target = 6) {
    const double raw = (r.hi - r.lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mult * mag >= raw) {
            step = mult * mag;
            break;
        }
    }
    std::vector<double> out;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step;
         v += step) {
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
}

class Canvas {
public:
    Canvas(const std::string& title, const Range& xr, const Range& yr,
           const std::string& x_label, const std::string& y_label)
        : xr_(xr), yr_(yr) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) +
                 "\" height=\"" + px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) +
                 " " + px(kHeight) + "\">\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        body_ += "<text x=\"" + px(kWidth / 2) +
                 "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                 "font-size=\"15\">" + title + "</text>\n";
        axes(x_label, y_label);
    }

    double sx(double x) const {
        return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight);
    }
    double sy(double y) const {
        return kHeight - kBottom -
               (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom);
    }

    void polyline(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& color) {
        body_ += "<polyline fill=\"none\" stroke=\"" + color +
                 "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < x.size(); ++i) {
            body_ += px(sx(x[i])) + "," + px(sy(y[i])) + " ";
        }
        body_ += "\"/>\n";
    }

    void band(const std::vector<double>& x, const std::vector<double>& lo,
              const std::vector<double>& hi, const std::string& color) {
        body_ += "<path fill=\"" + color + "\" fill-opacity=\"0.3\" stroke=\"none\" d=\"M";
        for (std::size_t i = 0; i < x.size(); ++i) {
            body_ += px(sx(x[i])) + "," + px(sy(lo[i])) + " L";
        }
        for (std::size_t i = x.size(); i-- > 0;) {
            body_ += px(sx(x[i])) + "," + px(sy(hi[i])) +
                     (i == 0 ? std::string(" Z\"/>\n") : std::string(" L"));
        }
    }

    void bar(double x0, double x1, double height, const std::string& color) {
        const double top = sy(height);
        const double base = sy(yr_.lo);
        body_ += "<rect x=\"" + px(sx(x0)) + "\" y=\"" + px(top) + "\" width=\"" +
                 px(sx(x1) - sx(x0)) + "\" height=\"" + px(base - top) +
                 "\" fill=\"" + color + "\" fill-opacity=\"0.5\"/>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
        double y = kTop + 6.0;
        for (const auto& [label, color] : entries) {
            body_ += "<rect x=\"" + px(kLeft + 8) + "\" y=\"" + px(y) +
                     "\" width=\"14\" height=\"4\" fill=\"" + color + "\"/>\n";
            body_ += "<text x=\"" + px(kLeft + 28) + "\" y=\"" + px(y + 5) +
                     "\" font-family=\"sans-serif\" font-size=\"11\">" + label +
                     "</text>\n";
            y += 16.0;
        }
    }

    void save(const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << body_ << "</svg>\n";
        if (!out) throw std::runtime_error("write failed: " + path);
    }

private:
    void axes(const std::string& x_label, const std::string& y_label) {
        body_ += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" +
                 px(kWidth - kLeft - kRight) + "\" height=\"" +
                 px(kHeight - kTop - kBottom) +
                 "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (double t : ticks(xr_)) {
            body_ += "<line x1=\"" + px(sx(t)) + "\" y1=\"" + px(kHeight - kBottom) +
                     "\" x2=\"" + px(sx(t)) + "\" y2=\"" +
                     px(kHeight - kBottom + 4) + "\" stroke=\"#444\"/>\n";
            body_ += "<text x=\"" + px(sx(t)) + "\" y=\"" + px(kHeight - kBottom + 16) +
                     "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"10\">" + evtherm::fmt_double(t) + "</text>\n";
        }
        for (double t : ticks(yr_)) {
            body_ += "<line x1=\"" + px(kLeft - 4) + "\" y1=\"" + px(sy(t)) +
                     "\" x2=\"" + px(kLeft) + "\" y2=\"" + px(sy(t)) +
                     "\" stroke=\"#444\"/>\n";
            body_ += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(sy(t) + 3) +
                     "\" text-anchor=\"end\" font-family=\"sans-serif\" "
                     "font-size=\"10\">" + evtherm::fmt_double(t) + "</text>\n";
        }
        body_ += "<text x=\"" + px(kWidth / 2) + "\" y=\"" + px(kHeight - 10) +
                 "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                 "font-size=\"12\">" + x_label + "</text>\n";
        body_ += "<text x=\"16\" y=\"" + px(kHeight / 2) +
                 "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                 "font-size=\"12\" transform=\"rotate(-90 16 " + px(kHeight / 2) +
                 ")\">" + y_label + "</text>\n";
    }

    Range xr_, yr_;
    std::string body_;
};

}  // namespace

void write_line_chart(const std::string& path, const LineChart& chart) {
    if (chart.x.empty()) throw std::invalid_argument("write_line_chart: empty x");
    Range xr, yr;
    for (double v : chart.x) xr.include(v);
    for (const auto& s : chart.series) {
        if (s.y.size() != chart.x.size()) {
            throw std::invalid_argument("write_line_chart: series length mismatch");
        }
        for (double v : s.y) yr.include(v);
    }
    if (chart.band) {
        if (chart.band->lo.size() != chart.x.size() ||
            chart.band->hi.size() != chart.x.size()) {
            throw std::invalid_argument("write_line_chart: band length mismatch");
        }
        for (double v : chart.band->lo) yr.include(v);
        for (double v : chart.band->hi) yr.include(v);
    }
    xr.widen_if_flat();
    yr.widen_if_flat();

    Canvas canvas(chart.title, xr, yr, chart.x_label, chart.y_label);
    std::vector<std::pair<std::string, std::string>> legend;
    if (chart.band) {
        canvas.band(chart.x, chart.band->lo, chart.band->hi, chart.band->color);
        legend.emplace_back(chart.band->label, chart.band->color);
    }
    for (const auto& s : chart.series) {
        canvas.polyline(chart.x, s.y, s.color);
        legend.emplace_back(s.label, s.color);
    }
    canvas.legend(legend);
    canvas.save(path);
}

void write_histogram_chart(const std::string& path, const std::string& title,
                           const std::string& x_label,
                           const std::vector<HistogramSet>& sets) {
    if (sets.empty()) {
        throw std::invalid_argument("write_histogram_chart: no data sets");
    }
    Range xr, yr;
    xr.include(0.0);
    yr.include(0.0);
    for (const auto& set : sets) {
        std::size_t total = 0;
        for (std::size_t c : set.hist.counts) total += c;
        xr.include(set.hist.bin_width *
                   static_cast<double>(set.hist.counts.size()));
        for (std::size_t c : set.hist.counts) {
            if (total > 0) {
                yr.include(static_cast<double>(c) / static_cast<double>(total));
            }
        }
    }
    xr.widen_if_flat();
    yr.widen_if_flat();

    Canvas canvas(title, xr, yr, x_label, "fraction of samples");
    std::vector<std::pair<std::string, std::string>> legend;
    for (const auto& set : sets) {
        std::size_t total = 0;
        for (std::size_t c : set.hist.counts) total += c;
        if (total == 0) continue;
        for (std::size_t bin = 0; bin < set.hist.counts.size(); ++bin) {
            if (set.hist.counts[bin] == 0) continue;
            const double fraction = static_cast<double>(set.hist.counts[bin]) /
                                    static_cast<double>(total);
            canvas.bar(set.hist.bin_width * static_cast<double>(bin),
                       set.hist.bin_width * static_cast<double>(bin + 1),
                       fraction, set.color);
        }
        legend.emplace_back(set.label, set.color);
    }
    canvas.legend(legend);
    canvas.save(path);
}

}  // namespace evtherm::svg
