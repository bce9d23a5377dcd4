// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "evtherm/rng.hpp"

namespace evtherm {

/// Lumped RC network of one charging module: module loss feeds the heat
/// sink node through r_eq; the node couples to ambient through r_hs and
/// stores heat in c_hs.
struct ThermalParams {
    double r_eq_k_per_w = 1.0e-3;   ///< device-to-sink thermal resistance
    double r_hs_k_per_w = 1.5e-3;   ///< sink-to-ambient thermal resistance
    double c_hs_j_per_k = 80'000.0; ///< heat sink capacitance
    double t_amb_c = 20.0;

    double tau_s() const { return r_hs_k_per_w * c_hs_j_per_k; }
    void validate() const;
};

/// Distribution means used when sampling per-module parameters.
struct ThermalMeans {
    double r_eq_k_per_w = 1.0e-3;
    double r_hs_k_per_w = 1.5e-3;
    double tau_s = 120.0;
};

/// Temperature of the heat-sink capacitance node.
struct ThermalState {
    double t_node_c = 20.0;
};

/// Draws r_eq, r_hs and the sink time constant from normal distributions
/// (in that order, each re-sampled until above half its mean) and derives
/// c_hs = tau / r_hs.
ThermalParams sample_thermal_params(Rng& rng, const ThermalMeans& means = {},
                                    double rel_std = 0.05,
                                    double t_amb_c = 20.0);

/// Advances the node temperature by dt under a constant loss (zero-order
/// hold). Uses the exact discretization of the RC response, so the result
/// matches the continuous solution to rounding for any step size.
ThermalState step(const ThermalState& state, double p_loss_w, double dt_s,
                  const ThermalParams& params);

/// Temperature recorded for the module: node temperature plus the drop
/// across r_eq under the present loss.
double measured_temperature_c(const ThermalState& state, double p_loss_w,
                              const ThermalParams& params);

/// Runs the module from a cold start (node at ambient) over a loss series
/// and returns the recorded temperature at each step.
std::vector<double> simulate_module_c(const std::vector<double>& loss_w,
                                      const ThermalParams& params, double dt_s);

}  // namespace evtherm
