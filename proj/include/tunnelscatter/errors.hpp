#pragma once

#include <stdexcept>
#include <string>

namespace tunnelscatter {

/// Argument outside the domain of a model (voltage off the IV curve, table
/// frequency out of range, nonpositive power in a log conversion).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// IV region that is not strictly decreasing.
class InvalidRegionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bias point outside the region where the diode oscillates.
class NotOscillatingError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Waveform or modulator configured with an unusable sample rate.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientDataError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Scenario validation failure. `field()` names the offending key path.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tunnelscatter
