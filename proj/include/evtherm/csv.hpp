// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace evtherm {

/// Shortest decimal form of a double that round-trips exactly; used for
/// every number written to CSV, model and report files so repeated runs
/// produce identical bytes.
std::string fmt_double(double value);

/// Strict double parse of a full token; throws std::invalid_argument on
/// trailing garbage or empty input.
double parse_double(std::string_view token);

/// Strict non-negative integer parse.
long long parse_int(std::string_view token);

}  // namespace evtherm
