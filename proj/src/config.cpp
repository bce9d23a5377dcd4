// SPDX-License-Identifier: Apache-2.0
#include "evtherm/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "evtherm/csv.hpp"

namespace evtherm {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::array<double, 24> parse_rate_list(const std::string& value) {
    std::array<double, 24> rates{};
    std::stringstream stream(value);
    std::string token;
    std::size_t count = 0;
    while (std::getline(stream, token, ',')) {
        if (count >= rates.size()) {
            throw std::invalid_argument("config: expected 24 hourly arrival rates");
        }
        rates[count++] = parse_double(trim(token));
    }
    if (count != rates.size()) {
        throw std::invalid_argument("config: expected 24 hourly arrival rates");
    }
    return rates;
}

std::string format_rate_list(const std::array<double, 24>& rates) {
    std::string out;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (i > 0) out += ',';
        out += fmt_double(rates[i]);
    }
    return out;
}

using Setter = std::function<void(SimConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"station.n_blocks",
         [](SimConfig& c, const std::string& v) { c.station.n_blocks = static_cast<int>(parse_int(v)); }},
        {"station.modules_per_block",
         [](SimConfig& c, const std::string& v) { c.station.modules_per_block = static_cast<int>(parse_int(v)); }},
        {"station.posts_per_block",
         [](SimConfig& c, const std::string& v) { c.station.posts_per_block = static_cast<int>(parse_int(v)); }},
        {"station.module_rating_w",
         [](SimConfig& c, const std::string& v) { c.station.module_rating_w = parse_double(v); }},
        {"station.sample_period_s",
         [](SimConfig& c, const std::string& v) { c.station.sample_period_s = parse_double(v); }},
        {"station.horizon_s",
         [](SimConfig& c, const std::string& v) { c.station.horizon_s = parse_double(v); }},
        {"station.ambient_temp_c",
         [](SimConfig& c, const std::string& v) { c.station.ambient_temp_c = parse_double(v); }},
        {"session.peak_power_mean_kw",
         [](SimConfig& c, const std::string& v) { c.sessions.peak_power_kw.mean = parse_double(v); }},
        {"session.peak_power_std_kw",
         [](SimConfig& c, const std::string& v) { c.sessions.peak_power_kw.stddev = parse_double(v); }},
        {"session.capacity_mean_kwh",
         [](SimConfig& c, const std::string& v) { c.sessions.battery_capacity_kwh.mean = parse_double(v); }},
        {"session.capacity_std_kwh",
         [](SimConfig& c, const std::string& v) { c.sessions.battery_capacity_kwh.stddev = parse_double(v); }},
        {"session.soc_init_mean",
         [](SimConfig& c, const std::string& v) { c.sessions.soc_init.mean = parse_double(v); }},
        {"session.soc_init_std",
         [](SimConfig& c, const std::string& v) { c.sessions.soc_init.stddev = parse_double(v); }},
        {"session.soc_cc_end_mean",
         [](SimConfig& c, const std::string& v) { c.sessions.soc_cc_end.mean = parse_double(v); }},
        {"session.soc_cc_end_std",
         [](SimConfig& c, const std::string& v) { c.sessions.soc_cc_end.stddev = parse_double(v); }},
        {"session.soc_final_mean",
         [](SimConfig& c, const std::string& v) { c.sessions.soc_final.mean = parse_double(v); }},
        {"session.soc_final_std",
         [](SimConfig& c, const std::string& v) { c.sessions.soc_final.stddev = parse_double(v); }},
        {"session.decay_factor_mean",
         [](SimConfig& c, const std::string& v) { c.sessions.decay_factor.mean = parse_double(v); }},
        {"session.decay_factor_std",
         [](SimConfig& c, const std::string& v) { c.sessions.decay_factor.stddev = parse_double(v); }},
        {"session.hourly_arrival_rates",
         [](SimConfig& c, const std::string& v) { c.sessions.hourly_arrival_rates = parse_rate_list(v); }},
        {"efficiency.fixed_loss_w",
         [](SimConfig& c, const std::string& v) { c.efficiency.fixed_loss_w = parse_double(v); }},
        {"efficiency.linear_coeff",
         [](SimConfig& c, const std::string& v) { c.efficiency.linear_coeff = parse_double(v); }},
        {"efficiency.quadratic_coeff_per_w",
         [](SimConfig& c, const std::string& v) { c.efficiency.quadratic_coeff_per_w = parse_double(v); }},
        {"seed",
         [](SimConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(v)); }},
    };
    return table;
}

}  // namespace

SimConfig parse_config_text(const std::string& text) {
    SimConfig config;
    std::stringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
        try {
            it->second(config, value);
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        " (" + key + "): " + e.what());
        }
    }
    config.station.validate();
    config.sessions.validate();
    config.efficiency.validate(config.station.module_rating_w);
    return config;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string serialize_config(const SimConfig& c) {
    std::ostringstream out;
    out << "station.n_blocks = " << c.station.n_blocks << '\n'
        << "station.modules_per_block = " << c.station.modules_per_block << '\n'
        << "station.posts_per_block = " << c.station.posts_per_block << '\n'
        << "station.module_rating_w = " << fmt_double(c.station.module_rating_w) << '\n'
        << "station.sample_period_s = " << fmt_double(c.station.sample_period_s) << '\n'
        << "station.horizon_s = " << fmt_double(c.station.horizon_s) << '\n'
        << "station.ambient_temp_c = " << fmt_double(c.station.ambient_temp_c) << '\n'
        << "session.peak_power_mean_kw = " << fmt_double(c.sessions.peak_power_kw.mean) << '\n'
        << "session.peak_power_std_kw = " << fmt_double(c.sessions.peak_power_kw.stddev) << '\n'
        << "session.capacity_mean_kwh = " << fmt_double(c.sessions.battery_capacity_kwh.mean) << '\n'
        << "session.capacity_std_kwh = " << fmt_double(c.sessions.battery_capacity_kwh.stddev) << '\n'
        << "session.soc_init_mean = " << fmt_double(c.sessions.soc_init.mean) << '\n'
        << "session.soc_init_std = " << fmt_double(c.sessions.soc_init.stddev) << '\n'
        << "session.soc_cc_end_mean = " << fmt_double(c.sessions.soc_cc_end.mean) << '\n'
        << "session.soc_cc_end_std = " << fmt_double(c.sessions.soc_cc_end.stddev) << '\n'
        << "session.soc_final_mean = " << fmt_double(c.sessions.soc_final.mean) << '\n'
        << "session.soc_final_std = " << fmt_double(c.sessions.soc_final.stddev) << '\n'
        << "session.decay_factor_mean = " << fmt_double(c.sessions.decay_factor.mean) << '\n'
        << "session.decay_factor_std = " << fmt_double(c.sessions.decay_factor.stddev) << '\n'
        << "session.hourly_arrival_rates = " << format_rate_list(c.sessions.hourly_arrival_rates) << '\n'
        << "efficiency.fixed_loss_w = " << fmt_double(c.efficiency.fixed_loss_w) << '\n'
        << "efficiency.linear_coeff = " << fmt_double(c.efficiency.linear_coeff) << '\n'
        << "efficiency.quadratic_coeff_per_w = " << fmt_double(c.efficiency.quadratic_coeff_per_w) << '\n'
        << "seed = " << c.seed << '\n';
    return out.str();
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t config_digest(const SimConfig& config) {
    return fnv1a64(serialize_config(config));
}

}  // namespace evtherm
