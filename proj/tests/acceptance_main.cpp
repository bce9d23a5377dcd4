// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: runs every toolkit-level criterion in order and prints
// one PASS/FAIL line per criterion. The expensive steps (a full simulated
// day, a full 10-member training run) execute once and feed the later
// criteria. Invoked as: acceptance <path-to-evtherm-binary>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "evtherm/anomaly.hpp"
#include "evtherm/config.hpp"
#include "evtherm/dataset.hpp"
#include "evtherm/mlp.hpp"
#include "evtherm/simulation.hpp"

using namespace evtherm;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSimSeed = 42;        // healthy training day
constexpr std::uint64_t kSplitSeed = 1001;    // train/validation shuffle
constexpr std::uint64_t kEnsembleSeed = 2000; // first member seed
constexpr std::uint64_t kTestSeeds[5] = {7001, 7002, 7003, 7004, 7005};

struct Context {
    std::string binary;
    SimConfig config;
    std::vector<ThermalParams> healthy_params;
    SimulationOutput healthy_day;
    Ensemble ensemble;
    std::vector<MemberResult> member_results;
    double train_ema_p99 = 0.0;
    std::vector<double> train_ema_pool;
    double training_seconds = 0.0;
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------------
// Independent oracles, deliberately written against the definitions and
// not against the library implementations they check.
// ---------------------------------------------------------------------

std::vector<double> rk4_reference(const std::vector<double>& loss_w,
                                  const ThermalParams& p, double dt_s,
                                  int substeps) {
    const auto derivative = [&](double t_node, double loss) {
        return (loss - (t_node - p.t_amb_c) / p.r_hs_k_per_w) / p.c_hs_j_per_k;
    };
    std::vector<double> out;
    out.reserve(loss_w.size());
    double t = p.t_amb_c;
    const double h = dt_s / substeps;
    for (double loss : loss_w) {
        for (int i = 0; i < substeps; ++i) {
            const double k1 = derivative(t, loss);
            const double k2 = derivative(t + 0.5 * h * k1, loss);
            const double k3 = derivative(t + 0.5 * h * k2, loss);
            const double k4 = derivative(t + h * k3, loss);
            t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push_back(t + p.r_eq_k_per_w * loss);
    }
    return out;
}

double student_t_pdf(double x, int dof) {
    const double v = static_cast<double>(dof);
    const double log_norm = std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
                            0.5 * std::log(v * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (v + 1.0) * std::log1p(x * x / v));
}

// Simpson quadrature of the density plus bisection on the CDF.
double student_t_quantile_oracle(double p, int dof) {
    const auto cdf = [dof](double x) {
        const int n = 20'000;
        const double h = x / n;
        double sum = student_t_pdf(0.0, dof) + student_t_pdf(x, dof);
        for (int i = 1; i < n; ++i) {
            sum += student_t_pdf(i * h, dof) * (i % 2 == 1 ? 4.0 : 2.0);
        }
        return 0.5 + sum * h / 3.0;
    };
    double lo = 0.0, hi = 50.0;
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Per-module metric series of one simulated day under the given ensemble.
struct DayMetrics {
    std::vector<int> module_ids;
    std::vector<MetricSeries> metrics;
};

DayMetrics day_metrics(const Ensemble& ensemble, const SimulationOutput& day) {
    DayMetrics out;
    const std::vector<Sample> samples = make_samples(day.records);
    std::size_t begin = 0;
    while (begin < samples.size()) {
        std::size_t end = begin;
        while (end < samples.size() &&
               samples[end].module_id == samples[begin].module_id) {
            ++end;
        }
        const auto count = static_cast<Eigen::Index>(end - begin);
        Eigen::MatrixXd windows(kWindowSize, count);
        std::vector<double> truth;
        truth.reserve(end - begin);
        for (Eigen::Index j = 0; j < count; ++j) {
            const Sample& s = samples[begin + static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < kWindowSize; ++i) {
                windows(static_cast<Eigen::Index>(i), j) = s.window_w[i];
            }
            truth.push_back(s.target_c);
        }
        const BatchPrediction pred = predict_batch(ensemble, windows);
        const std::vector<double> mean(pred.mean_c.begin(), pred.mean_c.end());
        const std::vector<double> spread(pred.std_c.begin(), pred.std_c.end());
        out.module_ids.push_back(samples[begin].module_id);
        out.metrics.push_back(compute_metrics(truth, mean, spread, FilterParams{}));
        begin = end;
    }
    return out;
}

double fraction_above(const std::vector<double>& series, double threshold) {
    std::size_t above = 0;
    for (double v : series) {
        if (v > threshold) ++above;
    }
    return static_cast<double>(above) / static_cast<double>(series.size());
}

int run_cli(const std::string& binary, const std::string& args) {
    const std::string cmd = binary + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool same_nonempty_bytes(const fs::path& a, const fs::path& b) {
    const std::string left = slurp(a);
    return !left.empty() && left == slurp(b);
}

// ---------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------

Outcome criterion_dataset_scale(Context& ctx) {
    const auto start = std::chrono::steady_clock::now();
    ctx.config = SimConfig{};
    ctx.config.seed = kSimSeed;
    Rng rng(ctx.config.seed);
    ctx.healthy_params = sample_station_params(ctx.config.station, rng);
    ctx.healthy_day = simulate_station(ctx.config, ctx.healthy_params, rng);
    const double elapsed = seconds_since(start);

    const std::size_t expected =
        ctx.config.station.n_steps() * ctx.config.station.n_modules();
    const bool pass = ctx.healthy_day.records.size() == 108'000 &&
                      expected == 108'000 && elapsed < 10.0;
    return {pass, std::to_string(ctx.healthy_day.records.size()) +
                      " records in " + fmt(elapsed, 3) + " s (limit 10 s)"};
}

Outcome criterion_thermal_oracle(Context&) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(314);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ThermalParams params = sample_thermal_params(rng);
        std::vector<double> losses(100);
        for (double& v : losses) v = rng.uniform(0.0, 2500.0);
        const auto exact = simulate_module_c(losses, params, 7.2);
        const auto reference = rk4_reference(losses, params, 7.2, 100);
        for (std::size_t i = 0; i < exact.size(); ++i) {
            worst = std::max(worst, std::abs(exact[i] - reference[i]));
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-6 && elapsed < 5.0,
            "max |exact - RK4| = " + fmt(worst, 3) + " C in " + fmt(elapsed, 3) +
                " s (limits 1e-6, 5 s)"};
}

Outcome criterion_gradient_check(Context&) {
    const auto start = std::chrono::steady_clock::now();
    const double h = 1e-5;
    double worst = 0.0;
    long checked = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng rng(seed * 31);
        const MlpShape shape{6, 8, 4};
        MlpWeights w = init_weights(shape, rng);
        Eigen::MatrixXd x(6, 5);
        Eigen::VectorXd y(5);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = rng.normal(0.0, 1.0);

        const MlpWeights analytic = mse_gradient(w, x, y);

        const auto relu_pattern = [&](const MlpWeights& weights) {
            std::vector<bool> pattern;
            Eigen::MatrixXd z1 = (weights.w1 * x).colwise() + weights.b1;
            Eigen::MatrixXd z2 =
                (weights.w2 * z1.cwiseMax(0.0)).colwise() + weights.b2;
            for (Eigen::Index i = 0; i < z1.size(); ++i) {
                pattern.push_back(z1(i) > 0.0);
            }
            for (Eigen::Index i = 0; i < z2.size(); ++i) {
                pattern.push_back(z2(i) > 0.0);
            }
            return pattern;
        };

        // Walk every coefficient of every block.
        const auto probe = [&](double* param, double analytic_g) {
            const double saved = *param;
            *param = saved + h;
            const double up = mse(w, x, y);
            const auto pattern_up = relu_pattern(w);
            *param = saved - h;
            const double down = mse(w, x, y);
            const auto pattern_down = relu_pattern(w);
            *param = saved;
            if (pattern_up != pattern_down) return;  // crossed a ReLU kink
            const double fd = (up - down) / (2.0 * h);
            const double rel =
                std::abs(fd - analytic_g) /
                std::max(1e-6, std::abs(fd) + std::abs(analytic_g));
            worst = std::max(worst, rel);
            ++checked;
        };
        for (Eigen::Index i = 0; i < w.w1.size(); ++i) {
            probe(w.w1.data() + i, analytic.w1(i));
        }
        for (Eigen::Index i = 0; i < w.b1.size(); ++i) {
            probe(w.b1.data() + i, analytic.b1(i));
        }
        for (Eigen::Index i = 0; i < w.w2.size(); ++i) {
            probe(w.w2.data() + i, analytic.w2(i));
        }
        for (Eigen::Index i = 0; i < w.b2.size(); ++i) {
            probe(w.b2.data() + i, analytic.b2(i));
        }
        for (Eigen::Index i = 0; i < w.w3.size(); ++i) {
            probe(w.w3.data() + i, analytic.w3(i));
        }
        probe(&w.b3, analytic.b3);
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-4 && checked > 1000 && elapsed < 30.0,
            "max relative error " + fmt(worst, 3) + " over " +
                std::to_string(checked) + " coordinates in " + fmt(elapsed, 3) +
                " s (limits 1e-4, 30 s)"};
}

Outcome criterion_training_quality(Context& ctx) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Sample> samples = make_samples(ctx.healthy_day.records);
    Rng split_rng(kSplitSeed);
    const SplitResult split = split_samples(samples, 0.8, split_rng);
    const NormStats norm = compute_norm_stats(split.train);
    const DesignMatrices train = to_matrices(split.train, norm);
    const DesignMatrices val = to_matrices(split.validation, norm);

    const EnsembleTrainResult trained =
        train_ensemble(train, val, norm, kEnsembleSeed, 10, TrainSettings{});
    ctx.ensemble = trained.ensemble;
    ctx.member_results = trained.member_results;
    ctx.training_seconds = seconds_since(start);

    double worst_rmse_c = 0.0;
    for (const MemberResult& r : ctx.member_results) {
        worst_rmse_c =
            std::max(worst_rmse_c, std::sqrt(r.best_val_mse) * norm.target_std_c);
    }

    const DayMetrics train_day = day_metrics(ctx.ensemble, ctx.healthy_day);
    ctx.train_ema_pool.clear();
    for (const MetricSeries& m : train_day.metrics) {
        ctx.train_ema_pool.insert(ctx.train_ema_pool.end(), m.ema.begin(),
                                  m.ema.end());
    }
    ctx.train_ema_p99 = percentile(ctx.train_ema_pool, 99.0);

    const bool pass = worst_rmse_c < 0.5 && ctx.training_seconds < 1800.0;
    return {pass, "worst member validation RMSE " + fmt(worst_rmse_c, 4) +
                      " C (limit 0.5), 10 members in " +
                      fmt(ctx.training_seconds, 4) + " s (limit 1800)"};
}

Outcome criterion_bias_reproduction(Context& ctx) {
    if (ctx.ensemble.members.empty()) {
        return {false, "skipped: no trained ensemble"};
    }
    const ThermalMeans means;
    int chosen = -1;
    double best_energy = -1.0;
    for (std::size_t m = 0; m < ctx.healthy_params.size(); ++m) {
        const ThermalParams& p = ctx.healthy_params[m];
        if (p.r_eq_k_per_w > means.r_eq_k_per_w &&
            p.r_hs_k_per_w > means.r_hs_k_per_w) {
            double energy = 0.0;
            for (double w : ctx.healthy_day.allocation.loss_w[m]) energy += w;
            if (energy > best_energy) {
                best_energy = energy;
                chosen = static_cast<int>(m);
            }
        }
    }
    if (chosen < 0) {
        return {false, "no module has both resistances above the mean"};
    }

    const std::vector<Sample> samples = make_samples(ctx.healthy_day.records);
    Eigen::MatrixXd windows(kWindowSize,
                            static_cast<Eigen::Index>(
                                ctx.config.station.n_steps()));
    std::vector<double> truth;
    Eigen::Index col = 0;
    for (const Sample& s : samples) {
        if (s.module_id != chosen) continue;
        for (std::size_t i = 0; i < kWindowSize; ++i) {
            windows(static_cast<Eigen::Index>(i), col) = s.window_w[i];
        }
        truth.push_back(s.target_c);
        ++col;
    }
    const BatchPrediction pred = predict_batch(ctx.ensemble, windows.leftCols(col));
    double signed_error = 0.0;
    for (Eigen::Index i = 0; i < col; ++i) {
        signed_error += pred.mean_c(i) - truth[static_cast<std::size_t>(i)];
    }
    signed_error /= static_cast<double>(col);
    return {signed_error < 0.0,
            "module " + std::to_string(chosen) + " mean signed error " +
                fmt(signed_error, 4) + " C (must be < 0)"};
}

Outcome criterion_filter_oracles(Context&) {
    Rng rng(271);
    std::vector<double> series(10'000);
    for (double& v : series) v = rng.uniform(0.0, 50.0);

    const auto sma_fast = sma(series, 500);
    const auto cma_fast = cma(series);
    const auto ema_fast = ema(series, 4e-3);

    double worst = 0.0;
    double prefix = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const std::size_t count = std::min<std::size_t>(500, k + 1);
        double window_sum = 0.0;
        for (std::size_t i = k + 1 - count; i <= k; ++i) window_sum += series[i];
        const double sma_naive = window_sum / static_cast<double>(count);
        worst = std::max(worst, std::abs(sma_fast[k] - sma_naive) /
                                    std::max(1.0, std::abs(sma_naive)));

        prefix += series[k];
        const double cma_naive = prefix / static_cast<double>(k + 1);
        worst = std::max(worst, std::abs(cma_fast[k] - cma_naive) /
                                    std::max(1.0, std::abs(cma_naive)));
    }
    // Explicit weighted-sum recomputation of the exponential filter.
    for (std::size_t k = 0; k < series.size(); k += 199) {
        double value = series[0];
        for (std::size_t i = 1; i <= k; ++i) {
            value = 4e-3 * series[i] + (1.0 - 4e-3) * value;
        }
        worst = std::max(worst, std::abs(ema_fast[k] - value) /
                                    std::max(1.0, std::abs(value)));
    }
    const bool first_exact = ema_fast[0] == series[0];
    return {worst < 1e-9 && first_exact,
            "worst filter deviation " + fmt(worst, 3) +
                " (limit 1e-9), EMA_1 == x_1 " + (first_exact ? "exact" : "BROKEN")};
}

Outcome criterion_t_statistic(Context&) {
    const double computed = student_t_quantile(0.995, 9);
    const double oracle = student_t_quantile_oracle(0.995, 9);
    const bool pass =
        std::abs(computed - 3.2498) <= 1e-4 && std::abs(computed - oracle) <= 1e-4;
    return {pass, "t(0.995, 9) = " + fmt(computed, 6) + ", quadrature oracle " +
                      fmt(oracle, 6) + " (target 3.2498 +/- 1e-4)"};
}

Outcome criterion_anomaly_replication(Context& ctx) {
    if (ctx.ensemble.members.empty()) {
        return {false, "skipped: no trained ensemble"};
    }
    std::vector<ThermalParams> faulted = ctx.healthy_params;
    faulted[4].r_hs_k_per_w *= 1.2;

    bool primary_fault_detected = false;
    double primary_fault_fraction = 0.0;
    double worst_healthy_fraction = 0.0;
    int literal_hits = 0;

    for (std::size_t i = 0; i < 5; ++i) {
        SimConfig config = ctx.config;
        config.seed = kTestSeeds[i];
        Rng rng(config.seed);
        const SimulationOutput day = simulate_station(config, faulted, rng);
        const DayMetrics metrics = day_metrics(ctx.ensemble, day);

        double fault_30 = 0.0;
        for (std::size_t m = 0; m < metrics.module_ids.size(); ++m) {
            const double frac_p99 =
                fraction_above(metrics.metrics[m].ema, ctx.train_ema_p99);
            const double frac_30 = fraction_above(metrics.metrics[m].ema, 30.0);
            if (metrics.module_ids[m] == 4) {
                fault_30 = frac_30;
                if (i == 0) {
                    primary_fault_fraction = frac_p99;
                    primary_fault_detected = frac_p99 > 0.20;
                }
            } else if (i == 0) {
                worst_healthy_fraction = std::max(worst_healthy_fraction, frac_p99);
            }
        }
        if (fault_30 > 0.20) ++literal_hits;
    }

    const bool pass = primary_fault_detected && worst_healthy_fraction < 0.05 &&
                      literal_hits >= 3;
    return {pass, "faulted module fraction above p99 " +
                      fmt(primary_fault_fraction, 4) +
                      " (need > 0.20), worst healthy " +
                      fmt(worst_healthy_fraction, 4) + " (need < 0.05), literal "
                      "threshold hit on " + std::to_string(literal_hits) +
                      "/5 seeds (need >= 3)"};
}

Outcome criterion_histogram_separation(Context& ctx) {
    if (ctx.ensemble.members.empty()) {
        return {false, "skipped: no trained ensemble"};
    }
    std::vector<ThermalParams> faulted = ctx.healthy_params;
    faulted[4].r_hs_k_per_w *= 1.2;
    SimConfig config = ctx.config;
    config.seed = kTestSeeds[0];
    Rng rng(config.seed);
    const SimulationOutput day = simulate_station(config, faulted, rng);
    const DayMetrics metrics = day_metrics(ctx.ensemble, day);

    std::vector<double> fault_ema;
    std::vector<double> healthy_pool;
    for (std::size_t m = 0; m < metrics.module_ids.size(); ++m) {
        if (metrics.module_ids[m] == 4) {
            fault_ema = metrics.metrics[m].ema;
        } else {
            healthy_pool.insert(healthy_pool.end(), metrics.metrics[m].ema.begin(),
                                metrics.metrics[m].ema.end());
        }
    }
    const double fault_median = percentile(fault_ema, 50.0);
    const double healthy_p95 = percentile(healthy_pool, 95.0);
    return {fault_median > healthy_p95,
            "faulted module EMA median " + fmt(fault_median, 4) +
                " vs pooled healthy p95 " + fmt(healthy_p95, 4)};
}

Outcome criterion_determinism(Context& ctx) {
    const fs::path work = fs::temp_directory_path() / "evtherm_acceptance_det";
    fs::remove_all(work);
    fs::create_directories(work);

    // Full-scale simulation, twice, through the CLI.
    std::string args = "simulate --seed 42 --out ";
    if (run_cli(ctx.binary, args + (work / "sim_a").string()) != 0 ||
        run_cli(ctx.binary, args + (work / "sim_b").string()) != 0) {
        return {false, "simulate runs failed"};
    }
    if (!same_nonempty_bytes(work / "sim_a" / "dataset.csv",
                             work / "sim_b" / "dataset.csv")) {
        return {false, "datasets differ between identical runs"};
    }

    // Reduced-scale training day so the double training stays cheap.
    SimConfig small;
    small.station.horizon_s = 7200.0;
    small.sessions.hourly_arrival_rates.fill(6.0);
    const fs::path cfg = work / "small.cfg";
    std::ofstream(cfg) << serialize_config(small);
    const std::string sim_small =
        "simulate --config " + cfg.string() + " --seed 9 --out ";
    if (run_cli(ctx.binary, sim_small + (work / "small_day").string()) != 0) {
        return {false, "reduced simulate failed"};
    }
    const std::string data = (work / "small_day" / "dataset.csv").string();
    const std::string train_args = "train --data " + data +
                                   " --seed 17 --epochs 5 --members 3 --out ";
    if (run_cli(ctx.binary, train_args + (work / "model_a.json").string()) != 0 ||
        run_cli(ctx.binary, train_args + (work / "model_b.json").string()) != 0) {
        return {false, "training runs failed"};
    }
    if (!same_nonempty_bytes(work / "model_a.json", work / "model_b.json")) {
        return {false, "model files differ between identical runs"};
    }

    const std::string detect_args = "detect --model " +
                                    (work / "model_a.json").string() + " --data " +
                                    data + " --out ";
    const int code_a = run_cli(ctx.binary, detect_args + (work / "det_a").string());
    const int code_b = run_cli(ctx.binary, detect_args + (work / "det_b").string());
    if (code_a < 0 || code_a != code_b) {
        return {false, "detect exit codes differ"};
    }
    if (!same_nonempty_bytes(work / "det_a" / "metrics.csv",
                             work / "det_b" / "metrics.csv") ||
        !same_nonempty_bytes(work / "det_a" / "report.txt",
                             work / "det_b" / "report.txt")) {
        return {false, "detect outputs differ between identical runs"};
    }
    fs::remove_all(work);
    return {true, "datasets, model files and reports byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <evtherm-binary>\n";
        return 2;
    }
    Context ctx;
    ctx.binary = argv[1];

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>>
        criteria = {
            {"dataset scale: 24 h day yields 108000 records", criterion_dataset_scale},
            {"thermal integrator matches fine-step RK4 within 1e-6 C",
             criterion_thermal_oracle},
            {"backprop gradients match central finite differences",
             criterion_gradient_check},
            {"every ensemble member trains below 0.5 C validation RMSE",
             criterion_training_quality},
            {"hot-parameter module is under-predicted on average",
             criterion_bias_reproduction},
            {"moving-average filters match naive recomputations",
             criterion_filter_oracles},
            {"t quantile t(0.995, 9) = 3.2498 within 1e-4", criterion_t_statistic},
            {"injected +20% sink resistance on module 4 is detected",
             criterion_anomaly_replication},
            {"faulted error distribution dominates the healthy one",
             criterion_histogram_separation},
            {"identical seeds give byte-identical artifacts", criterion_determinism},
        };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second(ctx);
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << "criterion "
                  << (i + 1) << ": " << criteria[i].first << " -- "
                  << outcome.detail << "\n"
                  << std::flush;
        if (!outcome.pass) ++failures;
    }
    if (failures == 0) {
        std::cout << "acceptance: all " << criteria.size() << " criteria passed\n";
        return 0;
    }
    std::cout << "acceptance: " << failures << " criterion(s) failed\n";
    return 1;
}
