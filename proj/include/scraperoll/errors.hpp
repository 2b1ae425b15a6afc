#pragma once

#include <stdexcept>
#include <string>

namespace scraperoll {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (bad dimensions, mismatched lengths, out-of-range weights).
struct ParameterError : Error {
    using Error::Error;
};

// A file or stream exists but its contents are not what the format requires
// (bad magic, truncated payload, malformed rows).
struct FormatError : Error {
    using Error::Error;
};

// The file could not be opened, read, or written at all.
struct IoError : Error {
    using Error::Error;
};

// Input is valid in type but carries no usable information (silence, empty
// mode bank, zero-extent motion).
struct DegenerateInputError : Error {
    using Error::Error;
};

// mu * tan(theta) >= 1: the normal-force expressions have a pole.
struct SingularityError : Error {
    using Error::Error;
};

// The minimum normal force would be non-positive; the scraper would leave the surface.
struct ContactLossError : Error {
    using Error::Error;
};

// Scenario text could not be parsed; carries the offending line when known.
struct ParseError : Error {
    ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_number(line) {}
    int line_number;
};

// A stage of run_scenario failed; wraps the underlying message with the stage name.
struct PipelineError : Error {
    PipelineError(const std::string& stage, const std::string& msg)
        : Error("[" + stage + "] " + msg), stage_name(stage) {}
    std::string stage_name;
};

} // namespace scraperoll
