#pragma once

#include <stdexcept>
#include <string>

namespace covqt {

/// Base class for every failure raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyPartition : Error {
    EmptyPartition() : Error("empty partition: at least one point is required") {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error("dimension mismatch: " + msg) {}
};

struct NotSymmetric : Error {
    NotSymmetric() : Error("matrix is not symmetric") {}
};

struct SingularMetric : Error {
    SingularMetric() : Error("metric has no usable eigenvalue (all components below the floor)") {}
};

struct InvalidK : Error {
    explicit InvalidK(const std::string& msg) : Error("invalid K: " + msg) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

struct ZeroMeasure : Error {
    ZeroMeasure() : Error("image has zero total intensity, nothing to sample") {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Parse failure with file and line context, e.g. "points.csv:17: expected 3 fields".
struct ParseError : Error {
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ": " + msg) {}
};

} // namespace covqt
