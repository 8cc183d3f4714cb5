#pragma once

#include <stdexcept>
#include <string>

namespace koopcert {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad shape, out-of-range value,
/// unknown system kind, missing parameter, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Integration, solve or rollout produced non-finite or out-of-range numbers.
class NumericalFailure : public Error {
  public:
    using Error::Error;
};

/// The empirical mass matrix is too ill-conditioned to invert.
class SingularMassMatrix : public NumericalFailure {
  public:
    SingularMassMatrix(const std::string& what, double condition)
        : NumericalFailure(what), condition_(condition) {}

    double condition() const noexcept { return condition_; }

  private:
    double condition_;
};

/// A stability/boundedness hypothesis required by a bound does not hold.
class HypothesisViolated : public Error {
  public:
    using Error::Error;
};

}  // namespace koopcert
