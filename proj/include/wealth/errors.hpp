#pragma once

#include <stdexcept>
#include <string>

namespace wealth {

// Every error raised by the library derives from Error so callers can catch
// the whole family; the subclasses carry the failure category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InfeasibleNetwork : public Error {
public:
    using Error::Error;
};

class InvalidNetwork : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NoStationaryState : public Error {
public:
    using Error::Error;
};

class RegimeMismatch : public Error {
public:
    using Error::Error;
};

/// s·a·g'(inf) == nu exactly. Both one-sided limits are reported in the message.
class KnifeEdge : public Error {
public:
    KnifeEdge(const std::string& what, double alpha_stationary_limit, double alpha_growth_limit)
        : Error(what), alpha_stationary_limit(alpha_stationary_limit),
          alpha_growth_limit(alpha_growth_limit) {}

    double alpha_stationary_limit;
    double alpha_growth_limit;
};

class DegenerateDynamics : public Error {
public:
    using Error::Error;
};

class DegenerateDiscriminant : public Error {
public:
    using Error::Error;
};

class PriceUndefined : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NonPositiveThreshold : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wealth
