#pragma once

#include <stdexcept>

namespace smalltime {

// Model kind outside the catalog, or an operation the kind cannot support.
class UnsupportedModel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested sampling scheme does not exist for the model.
class SchemeUnavailable : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A discretized path produced a non-finite value; the run is aborted.
class StepUnstable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simulated state left the domain of the requested mapping.
class MappingDomain : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Option price outside the static no-arbitrage interval.
class NoArbViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The model is outside the validity scope of the requested bound.
class OutOfScope : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The limiting covariance is degenerate, the half-limit check is vacuous.
class DegenerateLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sampling noise too large for the requested estimate to be meaningful.
class StatisticalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature could not reach the requested tolerance.
class QuadratureFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed configuration, JSON, or command line input.
class BadInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace smalltime
