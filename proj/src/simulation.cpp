// SPDX-License-Identifier: Apache-2.0
#include "evtherm/simulation.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "evtherm/csv.hpp"

namespace evtherm {

std::vector<ThermalParams> sample_station_params(const StationConfig& config,
                                                 Rng& rng) {
    config.validate();
    std::vector<ThermalParams> params;
    params.reserve(config.n_modules());
    for (int m = 0; m < config.n_modules(); ++m) {
        params.push_back(
            sample_thermal_params(rng, ThermalMeans{}, 0.05, config.ambient_temp_c));
    }
    return params;
}

SimulationOutput simulate_station(const SimConfig& config,
                                  const std::vector<ThermalParams>& params,
                                  Rng& rng) {
    config.station.validate();
    if (static_cast<int>(params.size()) != config.station.n_modules()) {
        throw std::invalid_argument(
            "simulate_station: one ThermalParams per module required");
    }

    SimulationOutput out;
    out.sessions =
        sample_sessions(config.sessions, config.station, rng, &out.session_stats);
    out.post_loads_w = build_post_loads_w(out.sessions, config.station);
    out.allocation =
        allocate_modules(out.post_loads_w, config.station, config.efficiency);

    const std::size_t steps = config.station.n_steps();
    out.temps_c.reserve(params.size());
    for (std::size_t m = 0; m < params.size(); ++m) {
        out.temps_c.push_back(simulate_module_c(
            out.allocation.loss_w[m], params[m], config.station.sample_period_s));
    }

    out.records.reserve(steps * params.size());
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t m = 0; m < params.size(); ++m) {
            Record r;
            r.step = k;
            r.time_s = static_cast<double>(k) * config.station.sample_period_s;
            r.module_id = static_cast<int>(m);
            r.p_loss_w = out.allocation.loss_w[m][k];
            r.t_hs_c = out.temps_c[m][k];
            out.records.push_back(r);
        }
    }
    return out;
}

void save_thermal_params(const std::string& path,
                         const std::vector<ThermalParams>& params) {
    nlohmann::json doc;
    doc["kind"] = "evtherm-thermal-params";
    nlohmann::json modules = nlohmann::json::array();
    for (const auto& p : params) {
        modules.push_back({{"r_eq_k_per_w", p.r_eq_k_per_w},
                           {"r_hs_k_per_w", p.r_hs_k_per_w},
                           {"c_hs_j_per_k", p.c_hs_j_per_k},
                           {"t_amb_c", p.t_amb_c}});
    }
    doc["modules"] = std::move(modules);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(1, '\t') << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ThermalParams> load_thermal_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open thermal parameters: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("thermal parameters " + path + ": " + e.what());
    }
    if (doc.value("kind", "") != "evtherm-thermal-params") {
        throw std::runtime_error("thermal parameters " + path + ": unrecognized format");
    }
    std::vector<ThermalParams> params;
    for (const auto& m : doc.at("modules")) {
        ThermalParams p;
        p.r_eq_k_per_w = m.at("r_eq_k_per_w").get<double>();
        p.r_hs_k_per_w = m.at("r_hs_k_per_w").get<double>();
        p.c_hs_j_per_k = m.at("c_hs_j_per_k").get<double>();
        p.t_amb_c = m.at("t_amb_c").get<double>();
        p.validate();
        params.push_back(p);
    }
    if (params.empty()) {
        throw std::runtime_error("thermal parameters " + path + ": no modules");
    }
    return params;
}

void write_allocation_csv(const std::string& path, const AllocationResult& alloc,
                          double sample_period_s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "step,time_s,module_id,assigned_w,loss_w\n";
    if (alloc.assigned_w.empty()) return;
    const std::size_t steps = alloc.assigned_w.front().size();
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t m = 0; m < alloc.assigned_w.size(); ++m) {
            out << k << ',' << fmt_double(static_cast<double>(k) * sample_period_s)
                << ',' << m << ',' << fmt_double(alloc.assigned_w[m][k]) << ','
                << fmt_double(alloc.loss_w[m][k]) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace evtherm
