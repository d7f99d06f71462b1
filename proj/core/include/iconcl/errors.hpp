#pragma once

#include <stdexcept>
#include <string>

namespace iconcl {

// Bad call arguments (shape mismatch, out-of-range parameters, ...).
// Maps to CLI exit code 1 when raised while parsing user input.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration (unknown flux kind, impossible GRF clip, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values or failed numerical sanity checks. CLI exit code 2.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Time step exceeds the CFL bound.
class StabilityError : public NumericError {
public:
    StabilityError(const std::string& msg, double max_speed)
        : NumericError(msg), max_wave_speed(max_speed) {}
    double max_wave_speed;
};

// I/O failure (missing file, short read, unwritable directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace iconcl
