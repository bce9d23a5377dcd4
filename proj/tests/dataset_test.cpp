// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "evtherm/csv.hpp"
#include "evtherm/dataset.hpp"

using namespace evtherm;

namespace {

std::vector<Record> synthetic_records(int n_modules, std::size_t n_steps,
                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Record> records;
    for (std::size_t k = 0; k < n_steps; ++k) {
        for (int m = 0; m < n_modules; ++m) {
            Record r;
            r.step = k;
            r.time_s = static_cast<double>(k) * 7.2;
            r.module_id = m;
            r.p_loss_w = rng.uniform(0.0, 1800.0);
            r.t_hs_c = 20.0 + rng.uniform(0.0, 8.0);
            records.push_back(r);
        }
    }
    return records;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("idle day yields all-zero windows and ambient targets") {
    std::vector<Record> records;
    for (std::size_t k = 0; k < 300; ++k) {
        for (int m = 0; m < 2; ++m) {
            records.push_back({k, k * 7.2, m, 0.0, 20.0});
        }
    }
    const auto samples = make_samples(records);
    REQUIRE(samples.size() == 600);
    for (const auto& s : samples) {
        CHECK(s.target_c == 20.0);
        for (double w : s.window_w) CHECK(w == 0.0);
    }
}

TEST_CASE("first window is zero-padded up to the single known loss") {
    const auto records = synthetic_records(1, 200, 3);
    const auto samples = make_samples(records);
    const Sample& first = samples.front();
    CHECK(first.step == 0);
    for (std::size_t i = 0; i + 1 < kWindowSize; ++i) {
        CHECK(first.window_w[i] == 0.0);
    }
    CHECK(first.window_w[kWindowSize - 1] == records[0].p_loss_w);
}

TEST_CASE("windows and targets align with the raw records") {
    const int n_modules = 3;
    const std::size_t n_steps = 400;
    const auto records = synthetic_records(n_modules, n_steps, 5);
    const auto samples = make_samples(records);
    REQUIRE(samples.size() == n_modules * n_steps);

    // Rebuild per-module series for the reconstruction check.
    std::vector<std::vector<double>> loss(n_modules), temp(n_modules);
    for (const auto& r : records) {
        loss[r.module_id].push_back(r.p_loss_w);
        temp[r.module_id].push_back(r.t_hs_c);
    }
    for (const auto& s : samples) {
        CHECK(s.target_c == temp[s.module_id][s.step]);
        for (std::size_t i = 0; i < kWindowSize; ++i) {
            const long long src = static_cast<long long>(s.step) -
                                  static_cast<long long>(kWindowSize - 1) +
                                  static_cast<long long>(i);
            const double expected =
                src >= 0 ? loss[s.module_id][static_cast<std::size_t>(src)] : 0.0;
            CHECK(s.window_w[i] == expected);
        }
    }
}

TEST_CASE("empty input and broken step sequences are handled") {
    CHECK(make_samples({}).empty());
    std::vector<Record> records = {{0, 0.0, 0, 1.0, 20.0},
                                   {2, 14.4, 0, 1.0, 20.0}};
    CHECK_THROWS_AS(make_samples(records), std::invalid_argument);
}

TEST_CASE("split produces the documented sizes deterministically") {
    auto samples = make_samples(synthetic_records(1, 10, 9));
    Rng a(4), b(4);
    const SplitResult r1 = split_samples(samples, 0.8, a);
    const SplitResult r2 = split_samples(samples, 0.8, b);
    CHECK(r1.train.size() == 8);
    CHECK(r1.validation.size() == 2);
    REQUIRE(r1.train.size() == r2.train.size());
    for (std::size_t i = 0; i < r1.train.size(); ++i) {
        CHECK(r1.train[i].step == r2.train[i].step);
    }

    // Union of the parts is the original multiset.
    std::vector<std::size_t> steps;
    for (const auto& s : r1.train) steps.push_back(s.step);
    for (const auto& s : r1.validation) steps.push_back(s.step);
    std::sort(steps.begin(), steps.end());
    for (std::size_t i = 0; i < steps.size(); ++i) CHECK(steps[i] == i);

    Rng c(4);
    std::vector<Sample> tiny(1);
    CHECK_THROWS_AS(split_samples(tiny, 0.8, c), std::invalid_argument);
}

TEST_CASE("normalization statistics are computed on the training split only") {
    const auto samples = make_samples(synthetic_records(2, 300, 11));
    Rng rng(1);
    SplitResult split = split_samples(samples, 0.8, rng);
    const NormStats stats = compute_norm_stats(split.train);

    // Reordering the validation part must not influence the statistics.
    std::reverse(split.validation.begin(), split.validation.end());
    const NormStats again = compute_norm_stats(split.train);
    CHECK(stats.input_mean_w == again.input_mean_w);
    CHECK(stats.input_std_w == again.input_std_w);
    CHECK(stats.target_mean_c == again.target_mean_c);
    CHECK(stats.target_std_c == again.target_std_c);
}

TEST_CASE("degenerate spread is floored and normalizes to zero") {
    std::vector<Record> records;
    for (std::size_t k = 0; k < 200; ++k) {
        records.push_back({k, k * 7.2, 0, 750.0, 24.0});
    }
    auto samples = make_samples(records);
    // Drop the zero-padded warm-up so every input is exactly constant.
    samples.erase(samples.begin(), samples.begin() + (kWindowSize - 1));
    REQUIRE(!samples.empty());
    const NormStats stats = compute_norm_stats(samples);
    CHECK(stats.input_std_w > 0.0);
    CHECK(stats.target_std_c > 0.0);
    const Sample normalized = apply_norm(samples.front(), stats);
    for (double w : normalized.window_w) CHECK(w == doctest::Approx(0.0));
    CHECK(normalized.target_c == doctest::Approx(0.0));
}

TEST_CASE("normalization round trip is the identity") {
    const auto samples = make_samples(synthetic_records(1, 250, 13));
    const NormStats stats = compute_norm_stats(samples);
    for (const auto& s : {samples.front(), samples[100], samples.back()}) {
        const Sample back = invert_norm(apply_norm(s, stats), stats);
        CHECK(back.target_c == doctest::Approx(s.target_c).epsilon(1e-12));
        for (std::size_t i = 0; i < kWindowSize; ++i) {
            CHECK(back.window_w[i] == doctest::Approx(s.window_w[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("normalized training inputs have zero mean and unit spread") {
    const auto samples = make_samples(synthetic_records(2, 400, 17));
    const NormStats stats = compute_norm_stats(samples);
    const DesignMatrices m = to_matrices(samples, stats);
    const double mean = m.inputs.mean();
    const double var = (m.inputs.array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
    const double tmean = m.targets.mean();
    const double tvar = (m.targets.array() - tmean).square().mean();
    CHECK(std::abs(tmean) < 1e-9);
    CHECK(std::sqrt(tvar) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dataset CSV round trip preserves every record") {
    const auto records = synthetic_records(3, 120, 21);
    const auto path = temp_file("evtherm_dataset_test.csv");
    write_dataset_csv(path.string(), records);
    const auto loaded = read_dataset_csv(path.string());
    REQUIRE(loaded.size() == records.size());
    // Written step-major; the synthetic fixture already is.
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].step == records[i].step);
        CHECK(loaded[i].time_s == records[i].time_s);
        CHECK(loaded[i].module_id == records[i].module_id);
        CHECK(loaded[i].p_loss_w == records[i].p_loss_w);
        CHECK(loaded[i].t_hs_c == records[i].t_hs_c);
    }
    std::filesystem::remove(path);
}

TEST_CASE("dataset CSV rejects unknown headers and malformed rows") {
    const auto path = temp_file("evtherm_dataset_bad.csv");
    {
        std::ofstream out(path);
        out << "step,module_id\n1,2\n";
    }
    CHECK_THROWS(read_dataset_csv(path.string()));
    {
        std::ofstream out(path);
        out << "step,time_s,module_id,p_loss_w,t_hs_c\n0,0,0,not_a_number,20\n";
    }
    CHECK_THROWS(read_dataset_csv(path.string()));
    std::filesystem::remove(path);
    CHECK_THROWS(read_dataset_csv(path.string()));
}

TEST_CASE("round-trip double formatting is exact") {
    for (double v : {0.0, 7.2, 1.0 / 3.0, 2.5e-7, 123456.789, -0.0625}) {
        CHECK(parse_double(fmt_double(v)) == v);
    }
    CHECK_THROWS_AS(parse_double("12x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}
