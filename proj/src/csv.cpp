// SPDX-License-Identifier: Apache-2.0
#include "evtherm/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace evtherm {

std::string fmt_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw std::invalid_argument("parse_double: bad token '" + std::string(token) + "'");
    }
    return value;
}

long long parse_int(std::string_view token) {
    long long value = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw std::invalid_argument("parse_int: bad token '" + std::string(token) + "'");
    }
    return value;
}

}  // namespace evtherm
