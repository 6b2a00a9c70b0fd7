#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace lcw {

using Rational = boost::rational<std::int64_t>;

/// "0", "1", "1/3"
std::string to_fraction_string(const Rational& value);

/// Parses "p/q" or an integer.
Rational parse_fraction(const std::string& text);

/// Fixed-point rendering with `places` digits, rounded half-up.
std::string to_decimal_string(const Rational& value, int places = 6);

inline double to_double(const Rational& value) {
    return boost::rational_cast<double>(value);
}

}  // namespace lcw
