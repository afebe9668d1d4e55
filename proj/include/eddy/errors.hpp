#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eddy {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation broke down on well-formed input (indefinite matrix,
/// non-converging sweep, singular system).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The caller supplied something unusable: bad file, bad geometry, bad
/// argument.
class InputError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(std::size_t pivot, double value)
      : NumericalError("matrix is not positive definite: pivot " + std::to_string(pivot) +
                       " has value " + std::to_string(value)),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class InvalidGeometry : public InputError {
 public:
  using InputError::InputError;
};

class ElectrodeOverlap : public InputError {
 public:
  using InputError::InputError;
};

class Disconnected : public InputError {
 public:
  using InputError::InputError;
};

/// Two segments overlap along a finite length; the Neumann kernel is not
/// integrable there.
class SingularPair : public InputError {
 public:
  using InputError::InputError;
};

class ProbeTooClose : public InputError {
 public:
  using InputError::InputError;
};

class NonintegerPeriods : public InputError {
 public:
  using InputError::InputError;
};

class NyquistViolation : public InputError {
 public:
  using InputError::InputError;
};

class IndexMismatch : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace eddy
