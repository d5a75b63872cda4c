#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maelstrom {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value or inconsistent dimensions in a spec.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Non-finite or out-of-range data.
class InputError : public Error {
  public:
    using Error::Error;
};

/// API misuse (unknown head id, non-scalar backward root, ...).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// A matrix with zero spectral radius cannot be rescaled to a target radius.
class UnscalableError : public Error {
  public:
    using Error::Error;
};

/// Linear system could not be solved (singular or not positive definite).
class SolverError : public Error {
  public:
    using Error::Error;
};

/// A metric is undefined for the given data (e.g. zero target variance).
class MetricError : public Error {
  public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergedError : public Error {
  public:
    DivergedError(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

}  // namespace maelstrom
