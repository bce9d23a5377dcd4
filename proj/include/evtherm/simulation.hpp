// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "evtherm/config.hpp"
#include "evtherm/dataset.hpp"
#include "evtherm/thermal.hpp"

namespace evtherm {

/// Full output of one simulated day.
struct SimulationOutput {
    std::vector<EvSession> sessions;
    SessionSampleStats session_stats;
    std::vector<std::vector<double>> post_loads_w;
    AllocationResult allocation;
    std::vector<std::vector<double>> temps_c;  ///< recorded, [module][step]
    std::vector<Record> records;               ///< flattened, step-major
};

/// Samples thermal parameters for every module of the station, in module
/// order.
std::vector<ThermalParams> sample_station_params(const StationConfig& config,
                                                 Rng& rng);

/// Runs sessions -> post loads -> module allocation -> thermal response.
/// The rng only feeds session sampling, so a run can re-use previously
/// sampled thermal parameters.
SimulationOutput simulate_station(const SimConfig& config,
                                  const std::vector<ThermalParams>& params,
                                  Rng& rng);

/// Per-module thermal parameters persisted as JSON so that several runs
/// (for example a healthy and a degraded day) share the same modules.
void save_thermal_params(const std::string& path,
                         const std::vector<ThermalParams>& params);
std::vector<ThermalParams> load_thermal_params(const std::string& path);

/// Allocation CSV: header `step,time_s,module_id,assigned_w,loss_w`.
void write_allocation_csv(const std::string& path, const AllocationResult& alloc,
                          double sample_period_s);

}  // namespace evtherm
