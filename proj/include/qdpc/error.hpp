#pragma once

#include <stdexcept>
#include <string>

namespace qdpc {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (dimensions, parameters, names).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Array shapes that must agree do not.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Source and pupil do not overlap, so there is no background to normalize by.
class DegenerateOpticsError : public Error {
public:
    using Error::Error;
};

/// A transfer function or transform result lost its required symmetry.
class SymmetryError : public Error {
public:
    using Error::Error;
};

/// Spectral division hit a zero denominator.
class SingularError : public Error {
public:
    using Error::Error;
};

/// An iterative solver produced a non-finite cost.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
    [[nodiscard]] int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Element-wise ratio with a zero or negative denominator.
class DivisionError : public Error {
public:
    DivisionError(const std::string& what, long long pixel_count)
        : Error(what + ": " + std::to_string(pixel_count) + " degenerate pixel(s)"),
          pixel_count_(pixel_count) {}
    [[nodiscard]] long long pixel_count() const noexcept { return pixel_count_; }

private:
    long long pixel_count_;
};

/// Metric reference is unusable (e.g. identically zero ground truth).
class ReferenceError : public Error {
public:
    using Error::Error;
};

/// File read/write or format failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qdpc
