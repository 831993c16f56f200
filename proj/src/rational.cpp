#include "poem/rational.hpp"

#include <cctype>
#include <cstdlib>

#include "poem/errors.hpp"

namespace poem {

namespace {

long long parse_ll(const std::string& text) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("not an integer: '" + text + "'");
    }
    if (pos != text.size()) throw ConfigError("trailing characters in number: '" + text + "'");
    return v;
}

}  // namespace

Fraction parse_fraction(const std::string& text) {
    if (text.empty()) throw ConfigError("empty number");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        long long num = parse_ll(text.substr(0, slash));
        long long den = parse_ll(text.substr(slash + 1));
        if (den == 0) throw ConfigError("zero denominator in '" + text + "'");
        return Fraction(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Fraction(parse_ll(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_digits = text.size() - dot - 1;
    if (frac_digits > 18) throw ConfigError("too many decimal digits in '" + text + "'");
    long long den = 1;
    for (std::size_t i = 0; i < frac_digits; ++i) den *= 10;
    return Fraction(parse_ll(digits), den);
}

std::string to_string(const Fraction& f) {
    if (f.denominator() == 1) return std::to_string(f.numerator());
    return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

}  // namespace poem
