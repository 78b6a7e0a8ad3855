#pragma once

#include <stdexcept>
#include <string>

namespace semiorank {

/// Mismatched vector lengths between a composition and a spectrum.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed or empty input data.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An exact/enumerative routine was asked for more work than its cap allows.
class CapExceededError : public std::runtime_error {
public:
  CapExceededError(const std::string& what, double size_estimate)
      : std::runtime_error(what), size_estimate(size_estimate) {}
  double size_estimate;
};

/// Iterative solver failed to converge or to bracket a root.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The energy budget sits at (or beyond) the condensation corner where the
/// two-parameter occupation model has no finite solution.
class DegenerateCondensationError : public SolverError {
public:
  using SolverError::SolverError;
};

} // namespace semiorank
