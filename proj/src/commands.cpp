// SPDX-License-Identifier: Apache-2.0
#include "evtherm/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "evtherm/anomaly.hpp"
#include "evtherm/config.hpp"
#include "evtherm/csv.hpp"
#include "evtherm/dataset.hpp"
#include "evtherm/model_io.hpp"
#include "evtherm/simulation.hpp"
#include "evtherm/svg.hpp"

namespace evtherm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_manifest(const fs::path& path, json manifest) {
    manifest["kind"] = "evtherm-manifest";
    manifest["tool_version"] = kToolVersion;
    manifest["created_utc"] = utc_now_iso8601();
    write_text_file(path, manifest.dump(1, '\t') + "\n");
}

/// Per-module truth and ensemble outputs in step order.
struct ModulePredictions {
    int module_id = 0;
    std::vector<double> time_s;
    std::vector<double> truth_c;
    std::vector<double> mean_c;
    std::vector<double> std_c;
};

std::vector<ModulePredictions> predict_per_module(
    const Ensemble& ensemble, const std::vector<Record>& records) {
    std::map<int, std::map<std::size_t, double>> times;
    for (const Record& r : records) times[r.module_id][r.step] = r.time_s;

    const std::vector<Sample> samples = make_samples(records);
    std::vector<ModulePredictions> out;
    std::size_t begin = 0;
    while (begin < samples.size()) {
        std::size_t end = begin;
        while (end < samples.size() &&
               samples[end].module_id == samples[begin].module_id) {
            ++end;
        }
        const auto count = static_cast<Eigen::Index>(end - begin);
        Eigen::MatrixXd windows(kWindowSize, count);
        ModulePredictions mp;
        mp.module_id = samples[begin].module_id;
        mp.truth_c.reserve(end - begin);
        for (Eigen::Index j = 0; j < count; ++j) {
            const Sample& s = samples[begin + static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < kWindowSize; ++i) {
                windows(static_cast<Eigen::Index>(i), j) = s.window_w[i];
            }
            mp.truth_c.push_back(s.target_c);
            mp.time_s.push_back(times[mp.module_id][s.step]);
        }
        const BatchPrediction pred = predict_batch(ensemble, windows);
        mp.mean_c.assign(pred.mean_c.begin(), pred.mean_c.end());
        mp.std_c.assign(pred.std_c.begin(), pred.std_c.end());
        out.push_back(std::move(mp));
        begin = end;
    }
    return out;
}

std::vector<double> pooled_ema(const std::vector<ModulePredictions>& preds,
                               const FilterParams& params) {
    std::vector<double> pooled;
    for (const auto& mp : preds) {
        const MetricSeries metrics =
            compute_metrics(mp.truth_c, mp.mean_c, mp.std_c, params);
        pooled.insert(pooled.end(), metrics.ema.begin(), metrics.ema.end());
    }
    return pooled;
}

}  // namespace

int cmd_simulate(const SimulateOptions& options) {
    if (options.out_dir.empty()) {
        throw std::invalid_argument("simulate: --out is required");
    }
    SimConfig config = options.config_path.empty()
                           ? SimConfig{}
                           : load_config_file(options.config_path);
    if (options.seed_overridden) config.seed = options.seed;
    config.station.rng_seed = config.seed;

    Rng rng(config.seed);
    std::vector<ThermalParams> params;
    std::string params_source;
    if (options.params_path.empty()) {
        params = sample_station_params(config.station, rng);
        params_source = "sampled";
    } else {
        params = load_thermal_params(options.params_path);
        if (static_cast<int>(params.size()) != config.station.n_modules()) {
            throw std::runtime_error("thermal parameters describe " +
                                     std::to_string(params.size()) +
                                     " modules, station has " +
                                     std::to_string(config.station.n_modules()));
        }
        params_source = options.params_path;
    }
    if (options.anomaly_module >= 0) {
        if (options.anomaly_module >= config.station.n_modules()) {
            throw std::invalid_argument(
                "anomaly module id out of range (station has " +
                std::to_string(config.station.n_modules()) + " modules)");
        }
        if (!(options.r_hs_scale > 0.0)) {
            throw std::invalid_argument("anomaly r_hs_scale must be > 0");
        }
        params[options.anomaly_module].r_hs_k_per_w *= options.r_hs_scale;
    }

    const SimulationOutput sim = simulate_station(config, params, rng);

    fs::create_directories(options.out_dir);
    const fs::path dir(options.out_dir);
    write_dataset_csv((dir / "dataset.csv").string(), sim.records);
    write_allocation_csv((dir / "allocation.csv").string(), sim.allocation,
                         config.station.sample_period_s);
    save_thermal_params((dir / "thermal_params.json").string(), params);
    write_text_file(dir / "config_used.cfg", serialize_config(config));

    double delivered_wh = 0.0;
    double unserved_wh = 0.0;
    const double dt_h = config.station.sample_period_s / 3600.0;
    for (const auto& series : sim.allocation.assigned_w) {
        for (double w : series) delivered_wh += w * dt_h;
    }
    for (const auto& series : sim.allocation.unserved_w) {
        for (double w : series) unserved_wh += w * dt_h;
    }

    json manifest;
    manifest["command"] = "simulate";
    manifest["seed"] = config.seed;
    manifest["config_digest"] = hex64(config_digest(config));
    manifest["thermal_params_source"] = params_source;
    if (options.anomaly_module >= 0) {
        manifest["anomaly"] = {{"module", options.anomaly_module},
                               {"r_hs_scale", options.r_hs_scale}};
    } else {
        manifest["anomaly"] = nullptr;
    }
    manifest["outputs"] = {(dir / "dataset.csv").string(),
                           (dir / "allocation.csv").string(),
                           (dir / "thermal_params.json").string(),
                           (dir / "config_used.cfg").string()};
    write_manifest(dir / "manifest.json", std::move(manifest));

    std::cout << "simulate: " << sim.sessions.size() << " sessions ("
              << sim.session_stats.dropped << " dropped of "
              << sim.session_stats.attempted << " arrivals), "
              << fmt_double(delivered_wh / 1000.0) << " kWh delivered, "
              << fmt_double(unserved_wh / 1000.0) << " kWh unserved\n"
              << "simulate: wrote " << (dir / "dataset.csv").string() << " ("
              << sim.records.size() << " records)\n";
    return kExitOk;
}

int cmd_train(const TrainOptions& options) {
    if (options.data_csv.empty() || options.out_model.empty()) {
        throw std::invalid_argument("train: --data and --out are required");
    }
    if (options.members < 1 || options.epochs < 1 || options.batch_size < 1) {
        throw std::invalid_argument("train: members, epochs and batch must be >= 1");
    }
    const std::vector<Record> records = read_dataset_csv(options.data_csv);
    const std::vector<Sample> samples = make_samples(records);
    if (samples.size() < 2) {
        throw std::runtime_error("dataset " + options.data_csv +
                                 " has fewer than 2 usable samples");
    }

    Rng split_rng(options.seed);
    const SplitResult split = split_samples(samples, options.train_frac, split_rng);
    const NormStats norm = compute_norm_stats(split.train);
    const DesignMatrices train = to_matrices(split.train, norm);
    const DesignMatrices val = to_matrices(split.validation, norm);

    TrainSettings settings;
    settings.epochs = options.epochs;
    settings.batch_size = options.batch_size;

    const std::uint64_t base_seed = options.seed + 1;
    const EnsembleTrainResult trained =
        train_ensemble(train, val, norm, base_seed, options.members, settings);

    TrainingInfo info;
    info.epochs = options.epochs;
    info.batch_size = options.batch_size;
    info.learning_rate = settings.adam.learning_rate;
    info.base_seed = base_seed;
    info.split_seed = options.seed;
    info.train_rows = split.train.size();
    info.validation_rows = split.validation.size();
    for (std::size_t i = 0; i < trained.member_results.size(); ++i) {
        const MemberResult& r = trained.member_results[i];
        const double rmse_c = std::sqrt(r.best_val_mse) * norm.target_std_c;
        info.member_val_rmse_c.push_back(rmse_c);
        std::cout << "train: member " << i << " best validation RMSE "
                  << fmt_double(rmse_c) << " C (epoch " << r.best_epoch << ")\n";
    }

    // Baseline distribution of the filtered error metric on the training
    // day, used by detect as a data-driven threshold next to the fixed one.
    ErrorBaseline baseline;
    const FilterParams filter{baseline.sma_window, baseline.ema_alpha,
                              baseline.std_floor_c};
    const std::vector<double> train_ema =
        pooled_ema(predict_per_module(trained.ensemble, records), filter);
    baseline.train_ema_p99 = percentile(train_ema, 99.0);
    baseline.train_ema_hist = histogram(train_ema, 2.0);
    std::cout << "train: training-day EMA p99 "
              << fmt_double(baseline.train_ema_p99) << "\n";

    save_model(options.out_model, ModelFile{trained.ensemble, info, baseline});
    std::cout << "train: wrote " << options.out_model << "\n";
    return kExitOk;
}

int cmd_detect(const DetectOptions& options) {
    if (options.model_path.empty() || options.data_csv.empty() ||
        options.out_dir.empty()) {
        throw std::invalid_argument("detect: --model, --data and --out are required");
    }
    const ModelFile model = load_model(options.model_path);
    const std::vector<Record> records = read_dataset_csv(options.data_csv);
    if (records.empty()) {
        throw std::runtime_error("dataset " + options.data_csv + " is empty");
    }

    FilterParams filter;
    filter.sma_window = options.sma_window;
    filter.ema_alpha = options.ema_alpha;
    filter.std_floor_c = model.baseline.std_floor_c;

    const std::vector<ModulePredictions> preds =
        predict_per_module(model.ensemble, records);
    const double p99 = model.baseline.train_ema_p99;
    const int n_members = static_cast<int>(model.ensemble.members.size());

    std::vector<MetricSeries> metrics;
    std::vector<AnomalyReport> reports;       // fixed threshold
    std::vector<AnomalyReport> reports_p99;   // data-driven threshold
    for (const auto& mp : preds) {
        metrics.push_back(compute_metrics(mp.truth_c, mp.mean_c, mp.std_c, filter));
        reports.push_back(classify(metrics.back().ema, mp.module_id,
                                   options.threshold, options.fraction_rule));
        reports_p99.push_back(classify(metrics.back().ema, mp.module_id, p99,
                                       options.fraction_rule));
    }

    fs::create_directories(options.out_dir);
    const fs::path dir(options.out_dir);

    {
        std::ofstream out(dir / "metrics.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot open metrics.csv for writing");
        out << "step,module_id,ae,ae_norm,sma,cma,ema\n";
        const std::size_t steps = metrics.front().ae.size();
        for (std::size_t k = 0; k < steps; ++k) {
            for (std::size_t m = 0; m < preds.size(); ++m) {
                if (k >= metrics[m].ae.size()) continue;
                out << k << ',' << preds[m].module_id << ','
                    << fmt_double(metrics[m].ae[k]) << ','
                    << fmt_double(metrics[m].ae_norm[k]) << ','
                    << fmt_double(metrics[m].sma[k]) << ','
                    << fmt_double(metrics[m].cma[k]) << ','
                    << fmt_double(metrics[m].ema[k]) << '\n';
            }
        }
        if (!out) throw std::runtime_error("write failed: metrics.csv");
    }

    bool any_anomalous = false;
    {
        std::ostringstream out;
        out << "module  fraction_above_threshold  verdict    "
               "fraction_above_p99  verdict_p99\n";
        for (std::size_t m = 0; m < reports.size(); ++m) {
            any_anomalous = any_anomalous || reports[m].anomalous;
            out << reports[m].module_id << "       "
                << fmt_double(reports[m].fraction_above) << "  "
                << (reports[m].anomalous ? "anomalous" : "healthy") << "  "
                << fmt_double(reports_p99[m].fraction_above) << "  "
                << (reports_p99[m].anomalous ? "anomalous" : "healthy") << "\n";
        }
        out << "threshold = " << fmt_double(options.threshold)
            << "\nfraction_rule = " << fmt_double(options.fraction_rule)
            << "\ndata_driven_threshold_p99 = " << fmt_double(p99)
            << "\nema_alpha = " << fmt_double(options.ema_alpha)
            << "\nsma_window = " << options.sma_window
            << "\nstd_floor_c = " << fmt_double(filter.std_floor_c) << "\n";
        write_text_file(dir / "report.txt", out.str());
        std::cout << out.str();
    }

    // Figures: per-module prediction bands and metric traces, plus the
    // error-distribution comparison.
    const double t_stat = n_members >= 2
                              ? student_t_quantile(0.995, n_members - 1)
                              : 0.0;
    for (std::size_t m = 0; m < preds.size(); ++m) {
        const auto& mp = preds[m];
        std::vector<double> time_h(mp.time_s.size());
        for (std::size_t k = 0; k < time_h.size(); ++k) {
            time_h[k] = mp.time_s[k] / 3600.0;
        }
        svg::LineChart chart;
        chart.title = "module " + std::to_string(mp.module_id) +
                      ": predicted vs recorded temperature";
        chart.x_label = "time [h]";
        chart.y_label = "temperature [C]";
        chart.x = time_h;
        svg::Band band;
        band.label = "99% CI";
        band.color = "#f2a65a";
        band.lo.resize(mp.mean_c.size());
        band.hi.resize(mp.mean_c.size());
        for (std::size_t k = 0; k < mp.mean_c.size(); ++k) {
            const double half =
                t_stat * mp.std_c[k] / std::sqrt(static_cast<double>(n_members));
            band.lo[k] = mp.mean_c[k] - half;
            band.hi[k] = mp.mean_c[k] + half;
        }
        chart.band = std::move(band);
        chart.series.push_back({"recorded", "#1f77b4", mp.truth_c});
        chart.series.push_back({"ensemble mean", "#d62728", mp.mean_c});
        svg::write_line_chart(
            (dir / ("predictions_m" + std::to_string(mp.module_id) + ".svg"))
                .string(),
            chart);

        svg::LineChart mchart;
        mchart.title = "module " + std::to_string(mp.module_id) + ": anomaly metrics";
        mchart.x_label = "time [h]";
        mchart.y_label = "normalized error";
        mchart.x = time_h;
        mchart.series.push_back({"AE_norm", "#c7c7c7", metrics[m].ae_norm});
        mchart.series.push_back({"SMA", "#2ca02c", metrics[m].sma});
        mchart.series.push_back({"CMA", "#9467bd", metrics[m].cma});
        mchart.series.push_back({"EMA", "#d62728", metrics[m].ema});
        svg::write_line_chart(
            (dir / ("metrics_m" + std::to_string(mp.module_id) + ".svg")).string(),
            mchart);
    }

    {
        std::vector<double> healthy_pool;
        std::vector<svg::HistogramSet> sets;
        sets.push_back({"training day", "#1f77b4", model.baseline.train_ema_hist});
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            if (reports[m].anomalous) {
                sets.push_back({"module " + std::to_string(reports[m].module_id) +
                                    " (anomalous)",
                                "#d62728",
                                histogram(metrics[m].ema,
                                          model.baseline.train_ema_hist.bin_width)});
            } else {
                healthy_pool.insert(healthy_pool.end(), metrics[m].ema.begin(),
                                    metrics[m].ema.end());
            }
        }
        if (!healthy_pool.empty()) {
            sets.insert(sets.begin() + 1,
                        {"healthy modules", "#2ca02c",
                         histogram(healthy_pool,
                                   model.baseline.train_ema_hist.bin_width)});
        }
        svg::write_histogram_chart((dir / "histogram.svg").string(),
                                   "EMA of normalized absolute error",
                                   "EMA(AE_norm)", sets);
    }

    json manifest;
    manifest["command"] = "detect";
    manifest["model"] = options.model_path;
    manifest["data"] = options.data_csv;
    manifest["threshold"] = options.threshold;
    manifest["fraction_rule"] = options.fraction_rule;
    manifest["data_driven_threshold_p99"] = p99;
    json outputs = json::array();
    outputs.push_back((dir / "metrics.csv").string());
    outputs.push_back((dir / "report.txt").string());
    outputs.push_back((dir / "histogram.svg").string());
    for (const auto& mp : preds) {
        outputs.push_back(
            (dir / ("predictions_m" + std::to_string(mp.module_id) + ".svg")).string());
        outputs.push_back(
            (dir / ("metrics_m" + std::to_string(mp.module_id) + ".svg")).string());
    }
    manifest["outputs"] = std::move(outputs);
    write_manifest(dir / "manifest.json", std::move(manifest));

    return any_anomalous ? kExitAnomaly : kExitOk;
}

}  // namespace evtherm::cli
