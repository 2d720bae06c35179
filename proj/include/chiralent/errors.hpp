// errors.hpp - exception hierarchy shared by all chiralent modules

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace chiralent {

// Argument outside the mathematical domain of a formula (e.g. |delta| > 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A SystemConfig (or file/CLI input) violates an invariant. `field()` names
// the offending key using the configuration's dotted path.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Caller asked a routine to work outside the regime it is defined for.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Integrator step failure, quadrature non-convergence, ill-conditioning.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The 6x6 scattering system is singular at the requested energy, which only
// happens when a localized (bound) photon state sits at that energy.
class SingularSystemError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace chiralent
