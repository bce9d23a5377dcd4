// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "evtherm/rng.hpp"

namespace evtherm {

/// Layout and sampling grid of the charging station.
struct StationConfig {
    int n_blocks = 3;
    int modules_per_block = 3;
    int posts_per_block = 2;
    double module_rating_w = 60'000.0;
    double sample_period_s = 7.2;
    double horizon_s = 86'400.0;
    double ambient_temp_c = 20.0;
    std::uint64_t rng_seed = 1;

    int n_modules() const { return n_blocks * modules_per_block; }
    int n_posts() const { return n_blocks * posts_per_block; }

    /// Number of simulation steps; horizon must be an integer multiple of
    /// the sample period. 12000 for the defaults.
    std::size_t n_steps() const;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// One vehicle's five-parameter charging curve plus arrival metadata.
/// The curve is constant power up to soc_cc_end, then an exponential
/// taper that reaches peak * exp(-decay_factor) at soc_final.
struct EvSession {
    double arrival_time_s = 0.0;  ///< seconds since midnight
    int post_id = -1;
    double battery_capacity_kwh = 0.0;
    double soc_init = 0.0;
    double soc_cc_end = 0.0;  ///< end of the constant-power stage
    double soc_final = 0.0;
    double peak_power_kw = 0.0;
    double decay_factor = 1.0;

    void validate() const;
};

struct GaussianSpec {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Sampling distributions for charging events. Arrival counts per hour are
/// Poisson with the given rates; all curve parameters are normal draws
/// re-sampled (at most 100 times, then clamped) into their valid ranges.
struct SessionDistributions {
    GaussianSpec peak_power_kw{150.0, 20.0};
    GaussianSpec battery_capacity_kwh{90.0, 10.0};
    GaussianSpec soc_init{0.30, 0.05};
    GaussianSpec soc_cc_end{0.80, 0.03};
    GaussianSpec soc_final{0.95, 0.02};
    GaussianSpec decay_factor{2.0, 0.2};
    std::array<double, 24> hourly_arrival_rates = default_arrival_rates();

    /// Daytime-weighted profile: 0.5/h for 00-06, 3/h for 08-20, 1/h else.
    static std::array<double, 24> default_arrival_rates();

    void validate() const;
};

/// Quadratic loss map of one dc-dc charging module:
/// loss(p) = k0 + k1*p + k2*p^2 while enabled, exactly 0 when idle.
struct EfficiencyMap {
    double fixed_loss_w = 300.0;         ///< k0
    double linear_coeff = 0.01;          ///< k1
    double quadratic_coeff_per_w = 2.5e-7;  ///< k2

    double loss_w(double assigned_w) const {
        if (assigned_w <= 0.0) return 0.0;
        return fixed_loss_w + linear_coeff * assigned_w +
               quadratic_coeff_per_w * assigned_w * assigned_w;
    }

    void validate(double module_rating_w) const;
};

/// Per-module assigned power and loss plus per-post unserved remainder,
/// all as time series over the simulation grid.
struct AllocationResult {
    std::vector<std::vector<double>> assigned_w;  ///< [module][step]
    std::vector<std::vector<double>> loss_w;      ///< [module][step]
    std::vector<std::vector<double>> unserved_w;  ///< [post][step]
};

/// Bookkeeping from session sampling; arrivals finding no free post are
/// dropped, not queued.
struct SessionSampleStats {
    int attempted = 0;
    int dropped = 0;
};

/// Samples one day of charging events.
///
/// Draw order, which fixes the random stream: for each hour 0..23 a Poisson
/// count followed by that many uniform arrival instants; arrivals are then
/// sorted and, in time order, each draws peak power, capacity, and the
/// (soc_init, soc_cc_end, soc_final, decay) tuple. Posts are assigned
/// first-come-first-served: the lowest-index post free at the arrival
/// instant, busy until the session's charge completes on the sample grid.
std::vector<EvSession> sample_sessions(const SessionDistributions& dists,
                                       const StationConfig& config, Rng& rng,
                                       SessionSampleStats* stats = nullptr);

/// Requested power at a given state of charge. Constant peak power below
/// soc_cc_end, exponential taper up to soc_final. Throws std::domain_error
/// for soc outside [soc_init, soc_final].
double charging_power_kw(const EvSession& session, double soc);

/// Marches the state of charge forward on the sample grid (explicit Euler
/// on energy) and returns the per-step requested power. The series ends
/// when soc reaches soc_final.
std::vector<double> integrate_session_kw(const EvSession& session,
                                         double sample_period_s);

/// Accumulates per-post requested power in watts over the horizon.
/// Sessions must be sorted by arrival time.
std::vector<std::vector<double>> build_post_loads_w(
    const std::vector<EvSession>& sessions, const StationConfig& config);

/// Serves each block's post load with the equal-split module count that
/// minimizes total block loss; lower module indices are used first. Load
/// beyond the block's total rating is recorded as unserved, attributed to
/// posts in proportion to their requests.
AllocationResult allocate_modules(
    const std::vector<std::vector<double>>& post_loads_w,
    const StationConfig& config, const EfficiencyMap& eff);

}  // namespace evtherm
