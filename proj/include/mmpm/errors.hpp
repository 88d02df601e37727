#pragma once

#include <stdexcept>
#include <string>

namespace mmpm {

// Malformed or missing input data, or a failed invariant on a loaded
// artifact. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: unknown key, value out of range, or settings the
// corpus cannot satisfy. Also exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmpm
