#include "lcw/rational.hpp"

#include "lcw/error.hpp"

#include <charconv>
#include <cstdlib>

namespace lcw {

std::string to_fraction_string(const Rational& value) {
    if (value.denominator() == 1) return std::to_string(value.numerator());
    return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

namespace {
std::int64_t parse_int(std::string_view s, const std::string& whole) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw Error(ErrorCode::InvalidArgument, "malformed fraction '" + whole + "'");
    return v;
}
}  // namespace

Rational parse_fraction(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(parse_int(text, text));
    const std::string_view sv(text);
    const auto num = parse_int(sv.substr(0, slash), text);
    const auto den = parse_int(sv.substr(slash + 1), text);
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator in '" + text + "'");
    return Rational(num, den);
}

std::string to_decimal_string(const Rational& value, int places) {
    std::int64_t scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    const bool negative = value < 0;
    const Rational mag = negative ? -value : value;
    // round half-up on the magnitude
    const std::int64_t scaled = (mag.numerator() * scale * 2 + mag.denominator()) / (mag.denominator() * 2);
    std::string digits = std::to_string(scaled / scale);
    if (places > 0) {
        std::string frac = std::to_string(scaled % scale);
        frac.insert(0, static_cast<std::size_t>(places) - frac.size(), '0');
        digits += "." + frac;
    }
    return negative && scaled != 0 ? "-" + digits : digits;
}

}  // namespace lcw
