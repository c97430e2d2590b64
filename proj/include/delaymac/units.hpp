#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

#include "delaymac/error.hpp"

namespace delaymac {

// All quantities are SI doubles; the aliases only document intent.
using Volts = double;
using Amperes = double;
using Farads = double;
using Coulombs = double;
using Seconds = double;
using Joules = double;
using Siemens = double;
using Ohms = double;
using Kelvin = double;
using VoltsPerSecond = double;

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;          // J/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
}  // namespace constants

inline Volts thermal_voltage(Kelvin temperature) {
    return constants::boltzmann * temperature / constants::elementary_charge;
}

/// Parses `<float>[f|p|n|u|m]`. A bare number is taken as SI.
inline double parse_quantity(std::string_view text) {
    const auto fail = [&] { return ParseError("bad quantity '" + std::string(text) + "'"); };
    if (text.empty()) throw fail();

    std::string_view exponent;
    switch (text.back()) {
        case 'f': exponent = "e-15"; break;
        case 'p': exponent = "e-12"; break;
        case 'n': exponent = "e-9"; break;
        case 'u': exponent = "e-6"; break;
        case 'm': exponent = "e-3"; break;
        default: break;
    }
    if (!exponent.empty()) {
        text.remove_suffix(1);
        // a suffix on top of an explicit exponent would be ambiguous
        if (text.find_first_of("eE") != std::string_view::npos) throw fail();
    }
    if (text.empty() || text.front() == '+') throw fail();

    // Parse mantissa and exponent together so "2.2f" is the double nearest 2.2e-15.
    std::string literal(text);
    literal += exponent;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc{} || ptr != literal.data() + literal.size() || !std::isfinite(value)) throw fail();
    return value;
}

/// Shortest decimal that round-trips to the same double; '.' separator, no locale.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace delaymac
