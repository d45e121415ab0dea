#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonlin {

using Point = std::vector<double>;

/// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The mesh has no interior points for the requested (h, N).
class DegenerateMeshError : public Error {
  public:
    using Error::Error;
};

/// A coefficient matrix cannot be written as a nonnegative combination of the
/// stencil's rank-one directions.
class DecompositionError : public Error {
  public:
    using Error::Error;
};

/// Malformed problem configuration; `what()` names the offending field.
class ConfigError : public Error {
  public:
    using Error::Error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline double distance_sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(distance_sq(a, b));
}

} // namespace nonlin
