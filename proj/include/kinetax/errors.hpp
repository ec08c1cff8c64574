#pragma once

#include <stdexcept>
#include <string>

namespace kinetax {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid static model parameters (ordering, ranges, dimensions).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Violation of the enforcement bounds tau_n <= 0.5, xi in (1,2].
class ConstraintError : public Error {
  public:
    explicit ConstraintError(const std::string& what)
        : Error(what + " (enforcement constraint: tau_n <= 0.5 and xi in (1,2])") {}
};

/// Bad population state: wrong length, negative mass, zero income, empty sector.
class StateError : public Error {
  public:
    using Error::Error;
};

/// Conservation drift or negativity detected during time integration.
class IntegrationError : public Error {
  public:
    using Error::Error;
};

/// Rank-deficient or ineligible least-squares problem.
class FitError : public Error {
  public:
    using Error::Error;
};

/// Near-zero denominator when inverting the bilinear revenue surface.
class SingularInversionError : public Error {
  public:
    using Error::Error;
};

} // namespace kinetax
