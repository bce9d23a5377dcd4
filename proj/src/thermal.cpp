// SPDX-License-Identifier: Apache-2.0
#include "evtherm/thermal.hpp"

#include <cmath>
#include <stdexcept>

namespace evtherm {

namespace {

double draw_above_half_mean(Rng& rng, double mean, double rel_std) {
    double v;
    do {
        v = rng.normal(mean, rel_std * mean);
    } while (v <= 0.5 * mean);
    return v;
}

}  // namespace

void ThermalParams::validate() const {
    if (!(r_eq_k_per_w > 0.0) || !(r_hs_k_per_w > 0.0) || !(c_hs_j_per_k > 0.0)) {
        throw std::invalid_argument("ThermalParams: resistances and capacitance must be > 0");
    }
    if (!std::isfinite(t_amb_c)) {
        throw std::invalid_argument("ThermalParams: ambient temperature must be finite");
    }
}

ThermalParams sample_thermal_params(Rng& rng, const ThermalMeans& means,
                                    double rel_std, double t_amb_c) {
    if (rel_std < 0.0) {
        throw std::invalid_argument("sample_thermal_params: rel_std must be >= 0");
    }
    ThermalParams p;
    p.r_eq_k_per_w = draw_above_half_mean(rng, means.r_eq_k_per_w, rel_std);
    p.r_hs_k_per_w = draw_above_half_mean(rng, means.r_hs_k_per_w, rel_std);
    const double tau = draw_above_half_mean(rng, means.tau_s, rel_std);
    p.c_hs_j_per_k = tau / p.r_hs_k_per_w;
    p.t_amb_c = t_amb_c;
    p.validate();
    return p;
}

ThermalState step(const ThermalState& state, double p_loss_w, double dt_s,
                  const ThermalParams& params) {
    params.validate();
    if (!std::isfinite(state.t_node_c) || !std::isfinite(p_loss_w)) {
        throw std::invalid_argument("thermal step: non-finite input");
    }
    if (!(dt_s > 0.0)) {
        throw std::invalid_argument("thermal step: dt must be > 0");
    }
    if (p_loss_w < 0.0) {
        throw std::invalid_argument("thermal step: loss must be >= 0");
    }
    const double decay = std::exp(-dt_s / params.tau_s());
    const double rise = state.t_node_c - params.t_amb_c;
    return ThermalState{params.t_amb_c + rise * decay +
                        params.r_hs_k_per_w * p_loss_w * (1.0 - decay)};
}

double measured_temperature_c(const ThermalState& state, double p_loss_w,
                              const ThermalParams& params) {
    return state.t_node_c + params.r_eq_k_per_w * p_loss_w;
}

std::vector<double> simulate_module_c(const std::vector<double>& loss_w,
                                      const ThermalParams& params, double dt_s) {
    params.validate();
    std::vector<double> temps_c;
    temps_c.reserve(loss_w.size());
    ThermalState state{params.t_amb_c};
    for (double p : loss_w) {
        state = step(state, p, dt_s, params);
        temps_c.push_back(measured_temperature_c(state, p, params));
    }
    return temps_c;
}

}  // namespace evtherm
