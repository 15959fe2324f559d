#pragma once

#include <stdexcept>
#include <string>

namespace lrtc {

/// Caller violated an operation's precondition (bad mode index, shape
/// mismatch, out-of-range rate, ...).
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A solver produced or received non-finite numbers.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV rows, duplicate keys, empty
/// series).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A metric is undefined for its arguments (zero denominator).
class MetricError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

} // namespace lrtc
