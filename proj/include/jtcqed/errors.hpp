#pragma once

#include <stdexcept>
#include <string>

namespace jtcqed {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad index, mismatched space, malformed grid.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input violates a documented structural requirement (e.g. non-Hermitian).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// k1 = k2 = 0 leaves the effective-mode rotation undefined.
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

/// Adaptive step size collapsed.
class StiffnessError : public Error {
public:
    using Error::Error;
};

/// Liouvillian kernel is not one-dimensional.
class DegenerateSteadyStateError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Normalising occupation fell below the resolution floor.
class UndefinedCoherenceError : public Error {
public:
    UndefinedCoherenceError(const std::string& what, double tau)
        : Error(what), tau_(tau) {}
    double tau() const noexcept { return tau_; }

private:
    double tau_;
};

}  // namespace jtcqed
