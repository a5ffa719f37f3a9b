#pragma once

#include <stdexcept>
#include <string>

namespace drf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed file content; the message names the offending field.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Payload length disagrees with the declared dimensions.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Incompatible grid/tensor shapes or channel counts.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Empty or otherwise unusable feature region.
class RegionError : public Error {
public:
    using Error::Error;
};

/// Invalid argument values (empty inputs, bad ranges).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Weight file inconsistent with the expected network layer shapes.
class WeightError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure, message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Model cannot be trained on the given data.
class TrainError : public Error {
public:
    using Error::Error;
};

/// Tables that should align on patient_id do not.
class JoinError : public Error {
public:
    using Error::Error;
};

} // namespace drf
