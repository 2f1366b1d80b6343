#pragma once

#include <stdexcept>
#include <string>

namespace canseal {

// Bad flag/config values, out-of-range run parameters.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed text input (CSV record, candump line, meta file, hex key).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failures while reading or writing run directories.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough samples/frames for the requested statistic.
struct insufficient_data : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace canseal
