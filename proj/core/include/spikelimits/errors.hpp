#pragma once

#include <stdexcept>
#include <string>

namespace spikelimits {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or out-of-domain input (rho outside (0,1), non-unit
// projection vector, alpha at or below the bulk support, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A spike sits at or below the phase-transition threshold: phi'(alpha) <= 0.
class BelowPhaseTransition : public DomainError {
public:
    using DomainError::DomainError;
};

// Correlation-mode model whose assembled R does not have a unit diagonal.
class NotACorrelationModel : public DomainError {
public:
    using DomainError::DomainError;
};

// Spike ratio gap below the configured separation constant, or two spike
// groups too close for the cross-spike denominators.
class SeparationError : public DomainError {
public:
    using DomainError::DomainError;
};

// Operation restricted to simple spikes got a multiplicity > 1.
class MultiplicityError : public DomainError {
public:
    using DomainError::DomainError;
};

// Operation outside its stated scope (e.g. normalization effect on a
// multi-spike or covariance-mode model).
class ScopeError : public DomainError {
public:
    using DomainError::DomainError;
};

// Fixed-point solver did not reach the residual tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Sample covariance with a nonpositive diagonal entry cannot be normalized.
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

// Eigensolver or other numeric kernel failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Too few records for a distributional check.
class InsufficientData : public Error {
public:
    using Error::Error;
};

// Malformed input file / JSON.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace spikelimits
