#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mmpm {

// Non-negative rational threshold. Mining thresholds are compared as exact
// integer-count inequalities, so confidence/support cutoffs are held as
// num/den rather than floating point.
struct Rational {
    std::uint64_t num{0};
    std::uint64_t den{1};

    // Parses a plain decimal like "0.8", "1", or ".05". Throws ConfigError
    // on anything else. The result is reduced.
    static Rational from_decimal(std::string_view text);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;

    bool operator==(const Rational& other) const = default;
};

// a/b >= r, exact. b must be nonzero.
bool ratio_ge(std::uint64_t a, std::uint64_t b, const Rational& r);

// a/b > r, exact. b must be nonzero.
bool ratio_gt(std::uint64_t a, std::uint64_t b, const Rational& r);

}  // namespace mmpm
