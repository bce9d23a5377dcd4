// SPDX-License-Identifier: Apache-2.0
#include "evtherm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "evtherm/csv.hpp"

namespace evtherm {

namespace {

constexpr char kDatasetHeader[] = "step,time_s,module_id,p_loss_w,t_hs_c";

double floored_std(double raw_std, double mean, const char* what) {
    const double floor = 1e-6 * std::max(1.0, std::abs(mean));
    if (raw_std < floor) {
        std::cerr << "warning: " << what << " standard deviation " << raw_std
                  << " floored at " << floor << "\n";
        return floor;
    }
    return raw_std;
}

}  // namespace

std::vector<Sample> make_samples(const std::vector<Record>& records) {
    std::map<int, std::vector<const Record*>> per_module;
    for (const auto& r : records) {
        per_module[r.module_id].push_back(&r);
    }

    std::vector<Sample> samples;
    samples.reserve(records.size());
    for (auto& [module_id, rows] : per_module) {
        std::sort(rows.begin(), rows.end(),
                  [](const Record* a, const Record* b) { return a->step < b->step; });
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k]->step != k) {
                throw std::invalid_argument(
                    "make_samples: steps not contiguous from 0 for module " +
                    std::to_string(module_id));
            }
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
            Sample s;
            s.module_id = module_id;
            s.step = k;
            s.target_c = rows[k]->t_hs_c;
            for (std::size_t i = 0; i < kWindowSize; ++i) {
                const auto offset = static_cast<long long>(k) -
                                    static_cast<long long>(kWindowSize - 1) +
                                    static_cast<long long>(i);
                s.window_w[i] = offset >= 0 ? rows[offset]->p_loss_w : 0.0;
            }
            samples.push_back(s);
        }
    }
    return samples;
}

SplitResult split_samples(std::vector<Sample> samples, double train_frac,
                          Rng& rng) {
    if (samples.size() < 2) {
        throw std::invalid_argument("split_samples: need at least 2 samples");
    }
    if (!(train_frac > 0.0 && train_frac < 1.0)) {
        throw std::invalid_argument("split_samples: train_frac must be in (0, 1)");
    }
    rng.shuffle(samples);
    const auto n_train =
        static_cast<std::size_t>(std::floor(train_frac * samples.size()));
    SplitResult result;
    result.train.assign(samples.begin(), samples.begin() + n_train);
    result.validation.assign(samples.begin() + n_train, samples.end());
    return result;
}

NormStats compute_norm_stats(const std::vector<Sample>& train) {
    if (train.empty()) {
        throw std::invalid_argument("compute_norm_stats: empty training set");
    }
    double input_sum = 0.0;
    double target_sum = 0.0;
    const double n_inputs = static_cast<double>(train.size()) * kWindowSize;
    const double n_targets = static_cast<double>(train.size());
    for (const auto& s : train) {
        for (double w : s.window_w) input_sum += w;
        target_sum += s.target_c;
    }
    NormStats stats;
    stats.input_mean_w = input_sum / n_inputs;
    stats.target_mean_c = target_sum / n_targets;

    double input_sq = 0.0;
    double target_sq = 0.0;
    for (const auto& s : train) {
        for (double w : s.window_w) {
            const double d = w - stats.input_mean_w;
            input_sq += d * d;
        }
        const double d = s.target_c - stats.target_mean_c;
        target_sq += d * d;
    }
    stats.input_std_w =
        floored_std(std::sqrt(input_sq / n_inputs), stats.input_mean_w, "input");
    stats.target_std_c = floored_std(std::sqrt(target_sq / n_targets),
                                     stats.target_mean_c, "target");
    return stats;
}

Sample apply_norm(const Sample& sample, const NormStats& stats) {
    Sample out = sample;
    for (double& w : out.window_w) {
        w = (w - stats.input_mean_w) / stats.input_std_w;
    }
    out.target_c = (sample.target_c - stats.target_mean_c) / stats.target_std_c;
    return out;
}

Sample invert_norm(const Sample& sample, const NormStats& stats) {
    Sample out = sample;
    for (double& w : out.window_w) {
        w = w * stats.input_std_w + stats.input_mean_w;
    }
    out.target_c = sample.target_c * stats.target_std_c + stats.target_mean_c;
    return out;
}

DesignMatrices to_matrices(const std::vector<Sample>& samples,
                           const NormStats& stats) {
    DesignMatrices m;
    m.inputs.resize(kWindowSize, static_cast<Eigen::Index>(samples.size()));
    m.targets.resize(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        for (std::size_t i = 0; i < kWindowSize; ++i) {
            m.inputs(static_cast<Eigen::Index>(i), col) =
                (samples[j].window_w[i] - stats.input_mean_w) / stats.input_std_w;
        }
        m.targets(col) =
            (samples[j].target_c - stats.target_mean_c) / stats.target_std_c;
    }
    return m;
}

void write_dataset_csv(const std::string& path,
                       const std::vector<Record>& records) {
    std::vector<const Record*> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const Record* a, const Record* b) {
        return std::tie(a->step, a->module_id) < std::tie(b->step, b->module_id);
    });

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kDatasetHeader << '\n';
    for (const Record* r : rows) {
        out << r->step << ',' << fmt_double(r->time_s) << ',' << r->module_id
            << ',' << fmt_double(r->p_loss_w) << ',' << fmt_double(r->t_hs_c)
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Record> read_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kDatasetHeader) {
        throw std::runtime_error("bad dataset header in " + path);
    }
    std::vector<Record> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string_view, 5> fields;
        std::string_view rest = line;
        for (std::size_t i = 0; i < 5; ++i) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (i == 4)) {
                throw std::runtime_error("bad field count at " + path + ":" +
                                         std::to_string(line_no));
            }
            fields[i] = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{}
                                                   : rest.substr(comma + 1);
        }
        Record r;
        r.step = static_cast<std::size_t>(parse_int(fields[0]));
        r.time_s = parse_double(fields[1]);
        r.module_id = static_cast<int>(parse_int(fields[2]));
        r.p_loss_w = parse_double(fields[3]);
        r.t_hs_c = parse_double(fields[4]);
        records.push_back(r);
    }
    return records;
}

}  // namespace evtherm
