// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "evtherm/station.hpp"

namespace evtherm {

/// Everything a simulation run needs besides thermal parameters, which are
/// sampled (or loaded) separately so runs can share them.
struct SimConfig {
    StationConfig station;
    SessionDistributions sessions;
    EfficiencyMap efficiency;
    std::uint64_t seed = 1;
};

/// Parses the `key = value` config format (see README for the schema).
/// Unknown keys are rejected. Missing keys keep their defaults.
SimConfig parse_config_text(const std::string& text);
SimConfig load_config_file(const std::string& path);

/// Canonical text form of a config; parsing it back yields the same
/// config, and its digest identifies the run setup in manifests.
std::string serialize_config(const SimConfig& config);

std::uint64_t fnv1a64(std::string_view data);
std::uint64_t config_digest(const SimConfig& config);

}  // namespace evtherm
