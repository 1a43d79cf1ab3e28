#pragma once

#include <stdexcept>
#include <string>

namespace casc {

// Base for all library errors. Subtypes map to distinct CLI exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (dataset files, records).
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Invalid parameters: windows, grids, synth/latency configs, metric names.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace casc
