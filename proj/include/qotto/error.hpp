#pragma once

#include <stdexcept>
#include <string>

namespace qotto {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates a documented invariant (the message names it).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The hierarchy would exceed the configured ADO or memory budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// The adaptive integrator could not make progress.
class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double time)
        : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// The generator has no unique steady state.
class DegenerateSteadyState : public Error {
public:
    using Error::Error;
};

/// An observable that must be real came out with a sizeable imaginary part.
class ConventionError : public Error {
public:
    using Error::Error;
};

/// Equilibration did not complete within the time budget.
class BudgetExhausted : public Error {
public:
    BudgetExhausted(const std::string& what, double best_tau)
        : Error(what), best_tau_(best_tau) {}

    double best_tau() const noexcept { return best_tau_; }

private:
    double best_tau_;
};

} // namespace qotto
