#pragma once

#include <stdexcept>
#include <string>

namespace tubepi {

// Error families the CLI maps to distinct exit codes. Library code throws
// the most specific one; anything else surfaces as a generic failure.

// Bad configuration or flag values (exit 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble: missing files, failed writes (exit 3).
struct IOError : std::runtime_error {
    explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization produced non-finite parameters (exit 4).
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what)
        : std::runtime_error(what) {}
};

// Structurally invalid data: malformed CSV, wrong shapes (exit 5).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tubepi
