#pragma once

#include <stdexcept>
#include <string>

namespace delaymac {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text or file contents.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A domain invariant does not hold. `field()` names the offending parameter.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A closed-form model was evaluated outside the regime it is derived for.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Jitter model used before its unit convention was calibrated.
class UncalibratedFitError : public Error {
public:
    UncalibratedFitError() : Error("jitter fit has no calibrated unit_scale") {}
};

/// Design-space queries with no answer (empty region, no unit convention).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

}  // namespace delaymac
