#pragma once

#include <stdexcept>
#include <string>

namespace blackstart {

/// Base class for all errors raised by the simulation library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter set or scenario violates one of its invariants.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// The integrated state became non-finite.
class NumericalDivergence : public Error {
public:
    explicit NumericalDivergence(double t)
        : Error("numerical divergence at t = " + std::to_string(t) + " s"), time_(t) {}

    [[nodiscard]] double time() const { return time_; }

private:
    double time_;
};

/// The demagnetization sequence exceeded its per-phase timeout.
class DemagTimeout : public Error {
public:
    DemagTimeout() : Error("demag failed to converge") {}
};

/// A trajectory is too short to contain one full fundamental period.
class InsufficientSpan : public Error {
public:
    InsufficientSpan() : Error("insufficient span") {}
};

}  // namespace blackstart
