#pragma once

#include <stdexcept>
#include <string>

namespace odcsr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad row length, non-numeric cell, bad magic).
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Shape constraint violated, e.g. fewer than two points.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A configuration or specification fails validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Metric is undefined for the given labels (single class present).
class MetricError : public Error {
public:
    using Error::Error;
};

} // namespace odcsr
