#include "mmpm/rational.hpp"

#include <cctype>
#include <numeric>

#include "mmpm/errors.hpp"

namespace mmpm {

Rational Rational::from_decimal(std::string_view text) {
    if (text.empty()) throw ConfigError("empty decimal value");
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    bool seen_digit = false;
    bool seen_dot = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_dot) throw ConfigError("malformed decimal '" + std::string(text) + "'");
            seen_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ConfigError("malformed decimal '" + std::string(text) + "'");
        seen_digit = true;
        if (num > (UINT64_MAX - 9) / 10 || (seen_dot && den > UINT64_MAX / 10))
            throw ConfigError("decimal '" + std::string(text) + "' out of range");
        num = num * 10 + static_cast<std::uint64_t>(c - '0');
        if (seen_dot) den *= 10;
    }
    if (!seen_digit) throw ConfigError("malformed decimal '" + std::string(text) + "'");
    const std::uint64_t g = std::gcd(num == 0 ? den : num, den);
    return Rational{num / g, den / g};
}

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

bool ratio_ge(std::uint64_t a, std::uint64_t b, const Rational& r) {
    using u128 = unsigned __int128;
    return static_cast<u128>(a) * r.den >= static_cast<u128>(r.num) * b;
}

bool ratio_gt(std::uint64_t a, std::uint64_t b, const Rational& r) {
    using u128 = unsigned __int128;
    return static_cast<u128>(a) * r.den > static_cast<u128>(r.num) * b;
}

}  // namespace mmpm
