#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace couplex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A drift or diffusion evaluation produced a non-finite value.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& what, std::vector<double> state, double time)
        : Error(what), state_(std::move(state)), time_(time) {}

    const std::vector<double>& state() const noexcept { return state_; }
    double time() const noexcept { return time_; }

private:
    std::vector<double> state_;
    double time_;
};

/// An uncapped exit simulation did not leave the region within its step budget.
class ExitBudgetExceeded : public Error {
public:
    using Error::Error;
};

/// Two distributions do not live on the same reference cells.
class IncompatibleSupport : public Error {
public:
    using Error::Error;
};

/// A transition matrix is not row-stochastic.
class InvalidKernel : public Error {
public:
    using Error::Error;
};

/// A declared coefficient bound was contradicted at a sampled state.
class BoundViolation : public Error {
public:
    using Error::Error;
};

} // namespace couplex
