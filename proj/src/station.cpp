// SPDX-License-Identifier: Apache-2.0
#include "evtherm/station.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evtherm {

namespace {

double clamp(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

/// Normal draw re-sampled into [lo, hi]; after 100 rejections the last
/// draw is clamped.
double draw_bounded(Rng& rng, const GaussianSpec& spec, double lo, double hi) {
    double v = 0.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
        v = rng.normal(spec.mean, spec.stddev);
        if (v >= lo && v <= hi) return v;
    }
    return clamp(v, lo, hi);
}

struct SocTuple {
    double init, cc_end, final, decay;
};

bool soc_tuple_valid(const SocTuple& t) {
    return t.init >= 0.0 && t.init < t.cc_end && t.cc_end <= t.final &&
           t.final <= 1.0 && t.decay > 0.0;
}

SocTuple draw_soc_tuple(Rng& rng, const SessionDistributions& d) {
    SocTuple t{};
    for (int attempt = 0; attempt < 100; ++attempt) {
        t.init = rng.normal(d.soc_init.mean, d.soc_init.stddev);
        t.cc_end = rng.normal(d.soc_cc_end.mean, d.soc_cc_end.stddev);
        t.final = rng.normal(d.soc_final.mean, d.soc_final.stddev);
        t.decay = rng.normal(d.decay_factor.mean, d.decay_factor.stddev);
        if (soc_tuple_valid(t)) return t;
    }
    t.init = clamp(t.init, 0.0, 0.98);
    t.cc_end = clamp(t.cc_end, t.init + 1e-3, 0.99);
    t.final = clamp(t.final, t.cc_end, 1.0);
    t.decay = std::max(t.decay, 0.1);
    return t;
}

}  // namespace

std::size_t StationConfig::n_steps() const {
    const auto steps = std::llround(horizon_s / sample_period_s);
    if (steps < 1 ||
        std::abs(static_cast<double>(steps) * sample_period_s - horizon_s) >
            1e-6 * sample_period_s) {
        throw std::invalid_argument(
            "StationConfig: horizon_s must be an integer multiple of sample_period_s");
    }
    return static_cast<std::size_t>(steps);
}

void StationConfig::validate() const {
    if (n_blocks < 1 || modules_per_block < 1 || posts_per_block < 1) {
        throw std::invalid_argument("StationConfig: counts must be >= 1");
    }
    if (module_rating_w <= 0.0) {
        throw std::invalid_argument("StationConfig: module_rating_w must be > 0");
    }
    if (!(sample_period_s > 0.0) || !(horizon_s > 0.0)) {
        throw std::invalid_argument("StationConfig: grid must be positive");
    }
    n_steps();
}

void EvSession::validate() const {
    if (!(soc_init >= 0.0 && soc_init < soc_cc_end && soc_cc_end <= soc_final &&
          soc_final <= 1.0)) {
        throw std::invalid_argument("EvSession: soc ordering violated");
    }
    if (!(peak_power_kw > 0.0) || !(battery_capacity_kwh > 0.0) ||
        !(decay_factor > 0.0)) {
        throw std::invalid_argument("EvSession: power, capacity and decay must be > 0");
    }
}

std::array<double, 24> SessionDistributions::default_arrival_rates() {
    std::array<double, 24> rates{};
    for (int hour = 0; hour < 24; ++hour) {
        if (hour < 6) {
            rates[hour] = 0.5;
        } else if (hour >= 8 && hour < 20) {
            rates[hour] = 3.0;
        } else {
            rates[hour] = 1.0;
        }
    }
    return rates;
}

void SessionDistributions::validate() const {
    for (const auto* spec :
         {&peak_power_kw, &battery_capacity_kwh, &soc_init, &soc_cc_end,
          &soc_final, &decay_factor}) {
        if (spec->stddev < 0.0) {
            throw std::invalid_argument("SessionDistributions: stddev must be >= 0");
        }
    }
    for (double rate : hourly_arrival_rates) {
        if (rate < 0.0) {
            throw std::invalid_argument("SessionDistributions: rates must be >= 0");
        }
    }
}

void EfficiencyMap::validate(double module_rating_w) const {
    for (double p : {0.0, module_rating_w / 2.0, module_rating_w}) {
        if (loss_w(p) < 0.0) {
            throw std::invalid_argument("EfficiencyMap: loss must be >= 0 on [0, rating]");
        }
    }
    if (loss_w(module_rating_w / 2.0) <= 0.0 || loss_w(module_rating_w) <= 0.0) {
        throw std::invalid_argument("EfficiencyMap: loss must be > 0 under load");
    }
}

double charging_power_kw(const EvSession& session, double soc) {
    if (!(soc >= session.soc_init && soc <= session.soc_final)) {
        throw std::domain_error("charging_power_kw: soc outside [soc_init, soc_final]");
    }
    if (soc < session.soc_cc_end) return session.peak_power_kw;
    const double span = session.soc_final - session.soc_cc_end;
    const double fraction = span > 0.0 ? (soc - session.soc_cc_end) / span : 0.0;
    return session.peak_power_kw * std::exp(-session.decay_factor * fraction);
}

std::vector<double> integrate_session_kw(const EvSession& session,
                                         double sample_period_s) {
    // Tolerates soc_init == soc_final (an already-charged vehicle yields an
    // empty profile), which the strict ordering invariant would reject.
    if (!(session.peak_power_kw > 0.0) || !(session.battery_capacity_kwh > 0.0) ||
        !(session.decay_factor > 0.0)) {
        throw std::invalid_argument("integrate_session_kw: invalid session");
    }
    if (!(sample_period_s > 0.0)) {
        throw std::invalid_argument("integrate_session_kw: sample period must be > 0");
    }
    const double dt_h = sample_period_s / 3600.0;
    std::vector<double> power_kw;
    double soc = session.soc_init;
    while (soc < session.soc_final) {
        const double p = charging_power_kw(session, soc);
        power_kw.push_back(p);
        soc = std::min(soc + p * dt_h / session.battery_capacity_kwh,
                       session.soc_final);
    }
    return power_kw;
}

std::vector<EvSession> sample_sessions(const SessionDistributions& dists,
                                       const StationConfig& config, Rng& rng,
                                       SessionSampleStats* stats) {
    dists.validate();
    config.validate();

    std::vector<double> arrivals;
    for (int hour = 0; hour < 24; ++hour) {
        const unsigned count = rng.poisson(dists.hourly_arrival_rates[hour]);
        for (unsigned i = 0; i < count; ++i) {
            arrivals.push_back(rng.uniform(hour * 3600.0, (hour + 1) * 3600.0));
        }
    }
    std::sort(arrivals.begin(), arrivals.end());

    const double dt = config.sample_period_s;
    std::vector<double> post_busy_until(config.n_posts(), 0.0);
    std::vector<EvSession> sessions;
    SessionSampleStats local{};
    local.attempted = static_cast<int>(arrivals.size());

    for (double arrival : arrivals) {
        if (arrival >= config.horizon_s) break;
        EvSession s;
        s.arrival_time_s = arrival;
        s.peak_power_kw = draw_bounded(rng, dists.peak_power_kw, 10.0, 300.0);
        s.battery_capacity_kwh =
            draw_bounded(rng, dists.battery_capacity_kwh, 20.0, 200.0);
        const SocTuple t = draw_soc_tuple(rng, dists);
        s.soc_init = t.init;
        s.soc_cc_end = t.cc_end;
        s.soc_final = t.final;
        s.decay_factor = t.decay;
        s.validate();

        int post = -1;
        for (int p = 0; p < config.n_posts(); ++p) {
            if (post_busy_until[p] <= arrival) {
                post = p;
                break;
            }
        }
        if (post < 0) {
            ++local.dropped;
            continue;
        }
        s.post_id = post;
        const auto profile = integrate_session_kw(s, dt);
        const auto start_step = static_cast<std::size_t>(arrival / dt);
        post_busy_until[post] =
            static_cast<double>(start_step + profile.size()) * dt;
        sessions.push_back(s);
    }
    if (stats != nullptr) *stats = local;
    return sessions;
}

std::vector<std::vector<double>> build_post_loads_w(
    const std::vector<EvSession>& sessions, const StationConfig& config) {
    config.validate();
    const std::size_t steps = config.n_steps();
    std::vector<std::vector<double>> loads(config.n_posts(),
                                           std::vector<double>(steps, 0.0));
    for (const auto& session : sessions) {
        if (session.post_id < 0 || session.post_id >= config.n_posts()) {
            throw std::invalid_argument("build_post_loads_w: post_id out of range");
        }
        const auto profile = integrate_session_kw(session, config.sample_period_s);
        const auto start =
            static_cast<std::size_t>(session.arrival_time_s / config.sample_period_s);
        for (std::size_t i = 0; i < profile.size(); ++i) {
            const std::size_t k = start + i;
            if (k >= steps) break;
            loads[session.post_id][k] += profile[i] * 1000.0;
        }
    }
    return loads;
}

AllocationResult allocate_modules(
    const std::vector<std::vector<double>>& post_loads_w,
    const StationConfig& config, const EfficiencyMap& eff) {
    config.validate();
    eff.validate(config.module_rating_w);
    if (static_cast<int>(post_loads_w.size()) != config.n_posts()) {
        throw std::invalid_argument("allocate_modules: wrong number of post series");
    }
    const std::size_t steps = config.n_steps();
    for (const auto& series : post_loads_w) {
        if (series.size() != steps) {
            throw std::invalid_argument("allocate_modules: post series length mismatch");
        }
    }

    AllocationResult result;
    result.assigned_w.assign(config.n_modules(), std::vector<double>(steps, 0.0));
    result.loss_w.assign(config.n_modules(), std::vector<double>(steps, 0.0));
    result.unserved_w.assign(config.n_posts(), std::vector<double>(steps, 0.0));

    const int mpb = config.modules_per_block;
    const int ppb = config.posts_per_block;
    const double rating = config.module_rating_w;

    for (int block = 0; block < config.n_blocks; ++block) {
        for (std::size_t k = 0; k < steps; ++k) {
            double load = 0.0;
            for (int p = 0; p < ppb; ++p) {
                load += post_loads_w[block * ppb + p][k];
            }
            if (load <= 0.0) continue;

            const double capacity = mpb * rating;
            const double served = std::min(load, capacity);
            if (served < load) {
                const double shortfall_per_watt = (load - served) / load;
                for (int p = 0; p < ppb; ++p) {
                    result.unserved_w[block * ppb + p][k] =
                        post_loads_w[block * ppb + p][k] * shortfall_per_watt;
                }
            }

            // Pick the active-module count with minimum total loss among the
            // counts that can carry the served load with an equal split.
            int best_n = mpb;
            double best_loss = std::numeric_limits<double>::infinity();
            for (int n = 1; n <= mpb; ++n) {
                if (n * rating + 1e-9 < served) continue;
                const double total = n * eff.loss_w(served / n);
                if (total < best_loss) {
                    best_loss = total;
                    best_n = n;
                }
            }
            const double share = served / best_n;
            for (int m = 0; m < best_n; ++m) {
                result.assigned_w[block * mpb + m][k] = share;
                result.loss_w[block * mpb + m][k] = eff.loss_w(share);
            }
        }
    }
    return result;
}

}  // namespace evtherm
