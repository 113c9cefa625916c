#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apf {

/// Filesystem or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer observations than an estimator needs.
class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A measurement requested on an ensemble or weight mode that does not carry it.
class NotApplicableError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Every particle weight vanished (linear underflow or all log-weights -inf).
class DegenerateWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apf
